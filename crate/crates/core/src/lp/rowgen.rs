//! Row generation for LPs with many `<=` rows and few variables.
//!
//! The simplex runs on a subset of the rows; rows the current optimum
//! violates are added and the subset is re-solved. The final point is
//! feasible for every row and optimal for a relaxation, hence optimal.

use super::{dot, simplex_solve, LinearProgram, LpError, LpSolution, LpStatus, Sense, VarBound};
use crate::scalar::Scalar;

/// Feasibility slack for float rows when deciding what to add.
const FLOAT_ROW_TOL: f64 = 1e-12;

/// Solves `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`. Other shapes
/// fall through to [`simplex_solve`] on the full problem.
pub fn solve_by_row_generation<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    let suitable = lp.senses().iter().all(|s| *s == Sense::Le)
        && lp.bounds().iter().all(|b| *b == VarBound::NonNegative)
        && lp.rhs().iter().all(|b| !b.is_negative());
    let rows = lp.num_rows();
    let n = lp.num_vars();
    let initial = 4 * n + 16;
    if !suitable || rows <= 2 * initial {
        return simplex_solve(lp);
    }

    let stride = rows / initial;
    let mut active: Vec<usize> = (0..rows).step_by(stride).collect();
    let batch = 2 * n + 16;
    let mut iterations = 0;
    loop {
        let sub = LinearProgram::new(
            lp.objective().to_vec(),
            active.iter().map(|&i| lp.rows()[i].clone()).collect(),
            active.iter().map(|&i| lp.rhs()[i].clone()).collect(),
            vec![Sense::Le; active.len()],
            lp.bounds().to_vec(),
        )?;
        let sol = simplex_solve(&sub)?;
        iterations += sol.iterations;
        if sol.status == LpStatus::Unbounded {
            if active.len() == rows {
                return Ok(LpSolution { iterations, ..sol });
            }
            // Too few rows to bound the objective: densify.
            let mut is_active = vec![false; rows];
            active.iter().for_each(|&i| is_active[i] = true);
            let extra = (0..rows).filter(|&i| !is_active[i]).step_by(2);
            active.extend(extra.collect::<Vec<_>>());
            active.sort_unstable();
            continue;
        }

        let mut violated: Vec<(f64, usize)> = lp
            .rows()
            .iter()
            .zip(lp.rhs())
            .enumerate()
            .filter_map(|(i, (row, b))| {
                let excess = dot(row, &sol.point).sub(b);
                let bad = if T::EXACT {
                    excess.is_positive()
                } else {
                    excess.to_f64() > FLOAT_ROW_TOL * b.to_f64().abs().max(1.0)
                };
                bad.then(|| (excess.to_f64(), i))
            })
            .collect();
        if violated.is_empty() {
            return Ok(LpSolution { iterations, ..sol });
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        active.extend(violated.iter().take(batch).map(|v| v.1));
        active.sort_unstable();
        active.dedup();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::build_coefficient_lp;
    use crate::measure::Family;
    use crate::sawtooth::{breakpoints, coefficient_sum};
    use std::f64::consts::TAU;

    #[test]
    fn matches_full_solve_on_sine_grids() {
        for m in [1, 2, 5, 8] {
            let grid: Vec<f64> = (0..2048).map(|i| TAU * i as f64 / 2048.0).collect();
            let lp = build_coefficient_lp(Family::Sine, m, &grid).unwrap();
            let full = simplex_solve(&lp).unwrap().value.unwrap();
            let lazy = solve_by_row_generation(&lp).unwrap();
            assert!(lp.is_feasible(&lazy.point, 1e-11));
            assert!((lazy.value.unwrap() - full).abs() < 1e-11, "m = {m}");
        }
    }

    #[test]
    fn exact_sawtooth_rows() {
        for m in [6, 32] {
            let lp = build_coefficient_lp(Family::Sawtooth, m, &breakpoints(m).unwrap()).unwrap();
            let sol = solve_by_row_generation(&lp).unwrap();
            assert_eq!(sol.value, Some(coefficient_sum(m).unwrap()));
            assert!(lp.is_feasible(&sol.point, 0.0));
        }
    }
}
