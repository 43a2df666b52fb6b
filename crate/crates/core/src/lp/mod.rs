//! Discretised linear programs behind both inequalities.
//!
//! The coefficient LP maximises `sum a_k` over nonnegative weights with
//! `sum_k a_k h(k x_i) <= 1` at finitely many points; the measure LP
//! maximises `min_k E_p h(kx)` over probability vectors `p` on finitely many
//! atoms. Their optimal values multiply to one.

mod duality;
mod rowgen;
mod simplex;
mod text;

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fracparts::{sawtooth, sawtooth_exact, Rational};
use crate::measure::Family;
use crate::sawtooth::SawtoothError;
use crate::scalar::Scalar;
use crate::sine::SineError;

pub use duality::{
    default_sine_grid, duality_cross_check, sine_refinement, CheckResult, DualityReport, GridStep,
    DEFAULT_SINE_GRID, MAX_SAWTOOTH_M, MAX_SINE_M, MIN_SINE_GRID, SINE_DUAL_TOLERANCE,
    SINE_PRIMAL_TOLERANCE,
};
pub use rowgen::solve_by_row_generation;
pub use simplex::{simplex_solve, simplex_solve_with, PivotRule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no constraint or support points given")]
    NoPoints,
    #[error("m must be at least 1")]
    InvalidM,
    #[error("the {0} family has irrational values; use floating arithmetic")]
    Inexact(Family),
    #[error("non-finite point {0}")]
    NonFinite(f64),
    #[error("{family} cross-check supports m <= {max}, got {m}")]
    LimitExceeded {
        family: Family,
        m: usize,
        max: usize,
    },
    #[error("grid size must be a power of two >= {min}, got {got}")]
    InvalidGrid { got: usize, min: usize },
    #[error("simplex stopped after {0} pivots")]
    IterationLimit(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Sawtooth(#[from] SawtoothError),
    #[error(transparent)]
    Sine(#[from] SineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// Lower bound of a variable: `0` or `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarBound {
    NonNegative,
    Free,
}

/// `maximise objective . x` subject to `row_i . x (sense_i) rhs_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T: Scalar> {
    objective: Vec<T>,
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    senses: Vec<Sense>,
    bounds: Vec<VarBound>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(
        objective: Vec<T>,
        rows: Vec<Vec<T>>,
        rhs: Vec<T>,
        senses: Vec<Sense>,
        bounds: Vec<VarBound>,
    ) -> Result<Self, LpError> {
        let n = objective.len();
        if n == 0 {
            return Err(LpError::Dimension("no variables".into()));
        }
        if bounds.len() != n {
            return Err(LpError::Dimension(format!(
                "{} bounds for {n} variables",
                bounds.len()
            )));
        }
        if rhs.len() != rows.len() || senses.len() != rows.len() {
            return Err(LpError::Dimension(format!(
                "{} rows, {} right-hand sides, {} senses",
                rows.len(),
                rhs.len(),
                senses.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(LpError::Dimension(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                rows[i].len()
            )));
        }
        Ok(LinearProgram {
            objective,
            rows,
            rhs,
            senses,
            bounds,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn bounds(&self) -> &[VarBound] {
        &self.bounds
    }

    /// Whether `x` satisfies every constraint and bound: exactly for
    /// rationals, up to `tol` for doubles.
    pub fn is_feasible(&self, x: &[T], tol: f64) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = x.iter().zip(&self.bounds).all(|(xi, b)| match b {
            VarBound::NonNegative if T::EXACT => *xi >= T::zero(),
            VarBound::NonNegative => xi.to_f64() >= -tol,
            VarBound::Free => true,
        });
        bounds_ok
            && self
                .rows
                .iter()
                .zip(&self.rhs)
                .zip(&self.senses)
                .all(|((row, b), s)| {
                    let lhs = dot(row, x);
                    if T::EXACT {
                        match s {
                            Sense::Le => lhs <= *b,
                            Sense::Eq => lhs == *b,
                            Sense::Ge => lhs >= *b,
                        }
                    } else {
                        let d = lhs.to_f64() - b.to_f64();
                        match s {
                            Sense::Le => d <= tol,
                            Sense::Eq => d.abs() <= tol,
                            Sense::Ge => d >= -tol,
                        }
                    }
                })
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

/// Outcome of [`simplex_solve`]. `value` and `point` are set only when the
/// status is optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T: Scalar> {
    pub status: LpStatus,
    pub value: Option<T>,
    pub point: Vec<T>,
    pub iterations: usize,
}

/// Point types the LP builders accept: `h_k(x)` is `g(kx)` or `sin(kx)`.
pub trait LpPoint: Scalar {
    fn dilate(family: Family, k: usize, x: &Self) -> Result<Self, LpError>;
}

impl LpPoint for f64 {
    fn dilate(family: Family, k: usize, x: &f64) -> Result<f64, LpError> {
        if !x.is_finite() {
            return Err(LpError::NonFinite(*x));
        }
        match family {
            Family::Sawtooth => sawtooth(k as f64 * x).map_err(|_| LpError::NonFinite(*x)),
            Family::Sine => Ok((k as f64 * x.rem_euclid(TAU)).sin()),
        }
    }
}

impl LpPoint for Rational {
    fn dilate(family: Family, k: usize, x: &Rational) -> Result<Rational, LpError> {
        match family {
            Family::Sawtooth => Ok(sawtooth_exact(&(x * &Rational::integer(k as i64)))),
            Family::Sine => Err(LpError::Inexact(Family::Sine)),
        }
    }
}

/// Dual (coefficient) LP: maximise `sum a_k` subject to
/// `sum_k a_k h(k x_i) <= 1` for every point and `a >= 0`.
pub fn build_coefficient_lp<T: LpPoint>(
    family: Family,
    m: usize,
    points: &[T],
) -> Result<LinearProgram<T>, LpError> {
    if m == 0 {
        return Err(LpError::InvalidM);
    }
    if points.is_empty() {
        return Err(LpError::NoPoints);
    }
    let rows = points
        .iter()
        .map(|x| (1..=m).map(|k| T::dilate(family, k, x)).collect())
        .collect::<Result<Vec<Vec<T>>, _>>()?;
    let n = rows.len();
    LinearProgram::new(
        vec![T::one(); m],
        rows,
        vec![T::one(); n],
        vec![Sense::Le; n],
        vec![VarBound::NonNegative; m],
    )
}

/// Primal (measure) LP over `(p_1..p_n, t)`: maximise `t` subject to
/// `sum_i p_i h(k x_i) >= t` for `k = 1..m`, `sum p_i = 1`, `p >= 0`.
pub fn build_measure_lp<T: LpPoint>(
    family: Family,
    m: usize,
    support: &[T],
) -> Result<LinearProgram<T>, LpError> {
    if m == 0 {
        return Err(LpError::InvalidM);
    }
    if support.is_empty() {
        return Err(LpError::NoPoints);
    }
    let n = support.len();
    let mut rows = Vec::with_capacity(m + 1);
    for k in 1..=m {
        let mut row = support
            .iter()
            .map(|x| T::dilate(family, k, x))
            .collect::<Result<Vec<T>, _>>()?;
        row.push(T::one().neg());
        rows.push(row);
    }
    let mut total = vec![T::one(); n];
    total.push(T::zero());
    rows.push(total);

    let mut objective = vec![T::zero(); n];
    objective.push(T::one());
    let mut bounds = vec![VarBound::NonNegative; n];
    bounds.push(VarBound::Free);
    let mut senses = vec![Sense::Ge; m];
    senses.push(Sense::Eq);
    let mut rhs = vec![T::zero(); m];
    rhs.push(T::one());
    LinearProgram::new(objective, rows, rhs, senses, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sawtooth::{self as saw, breakpoints, coefficient_sum, verify_exact};
    use crate::sine::cm;
    use crate::CoefficientVector;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn r(p: i64, q: i64) -> Rational {
        Rational::frac(p, q)
    }

    fn solve_value<T: Scalar>(lp: &LinearProgram<T>) -> T {
        let sol = simplex_solve(lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        sol.value.unwrap()
    }

    #[test]
    fn one_variable() {
        let lp = LinearProgram::new(
            vec![Rational::one()],
            vec![vec![Rational::one()]],
            vec![Rational::one()],
            vec![Sense::Le],
            vec![VarBound::NonNegative],
        )
        .unwrap();
        assert_eq!(solve_value(&lp), Rational::one());
    }

    #[test]
    fn degenerate_optimum() {
        let lp = LinearProgram::new(
            vec![1.0, 1.0],
            vec![vec![1.0, 1.0]],
            vec![1.0],
            vec![Sense::Le],
            vec![VarBound::NonNegative; 2],
        )
        .unwrap();
        assert!((solve_value(&lp) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn statuses() {
        let unbounded = LinearProgram::new(
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0]],
            vec![1.0],
            vec![Sense::Le],
            vec![VarBound::NonNegative; 2],
        )
        .unwrap();
        assert_eq!(
            simplex_solve(&unbounded).unwrap().status,
            LpStatus::Unbounded
        );

        let infeasible = LinearProgram::new(
            vec![Rational::one()],
            vec![vec![Rational::one()], vec![Rational::one()]],
            vec![Rational::one(), Rational::integer(2)],
            vec![Sense::Le, Sense::Ge],
            vec![VarBound::NonNegative],
        )
        .unwrap();
        let sol = simplex_solve(&infeasible).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(sol.value.is_none());
    }

    #[test]
    fn free_variable_and_equality() {
        // x = y - 3, so the objective 3 - 2y peaks at y = 0.
        let lp = LinearProgram::new(
            vec![Rational::integer(-1), Rational::integer(-1)],
            vec![
                vec![Rational::one(), Rational::integer(-1)],
                vec![Rational::zero(), Rational::one()],
            ],
            vec![Rational::integer(-3), Rational::integer(5)],
            vec![Sense::Eq, Sense::Le],
            vec![VarBound::Free, VarBound::NonNegative],
        )
        .unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(Rational::integer(3)));
        assert_eq!(sol.point, vec![Rational::integer(-3), Rational::zero()]);
    }

    #[test]
    fn dimension_checks() {
        assert!(matches!(
            LinearProgram::new(
                vec![1.0, 1.0],
                vec![vec![1.0]],
                vec![1.0],
                vec![Sense::Le],
                vec![VarBound::NonNegative; 2]
            ),
            Err(LpError::Dimension(_))
        ));
        assert!(matches!(
            LinearProgram::new(
                vec![1.0],
                vec![vec![1.0]],
                vec![],
                vec![Sense::Le],
                vec![VarBound::NonNegative]
            ),
            Err(LpError::Dimension(_))
        ));
    }

    #[test]
    fn sawtooth_dual_m7() {
        let lp = build_coefficient_lp(Family::Sawtooth, 7, &breakpoints(7).unwrap()).unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(r(19, 4)));
        assert!(lp.is_feasible(&sol.point, 0.0));
        // The optimiser is a valid inequality, whichever vertex it is.
        let b = CoefficientVector::new(Family::Sawtooth, sol.point).unwrap();
        assert_eq!(verify_exact(&b).unwrap().max_value, Rational::one());
    }

    #[test]
    fn pivot_rules_agree() {
        for m in [3, 7, 9] {
            let pts = breakpoints(m).unwrap();
            for lp in [
                build_coefficient_lp(Family::Sawtooth, m, &pts).unwrap(),
                build_measure_lp(Family::Sawtooth, m, &pts).unwrap(),
            ] {
                let bland = simplex_solve_with(&lp, PivotRule::Bland).unwrap();
                let hybrid = simplex_solve_with(&lp, PivotRule::Hybrid).unwrap();
                assert_eq!(bland.value, hybrid.value, "m = {m}");
            }
        }
    }

    #[test]
    fn sawtooth_m1_cases() {
        let lp = build_coefficient_lp(Family::Sawtooth, 1, &[r(1, 2)]).unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(Rational::integer(2)));
        assert_eq!(sol.point, vec![Rational::integer(2)]);
        let lp = build_measure_lp(Family::Sawtooth, 1, &[r(1, 2)]).unwrap();
        assert_eq!(solve_value(&lp), r(1, 2));
    }

    #[test]
    fn sawtooth_measure_m7() {
        let support = [r(1, 2), r(1, 4), r(1, 8), r(1, 14)];
        let lp = build_measure_lp(Family::Sawtooth, 7, &support).unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(r(4, 19)));
        assert!(lp.is_feasible(&sol.point, 0.0));
    }

    #[test]
    fn sine_measure_m8() {
        let support: Vec<f64> = [1.0, 3.0, 5.0, 7.0].iter().map(|j| j * PI / 9.0).collect();
        let lp = build_measure_lp(Family::Sine, 8, &support).unwrap();
        let v = solve_value(&lp);
        assert!((v - 1.0 / cm(8).unwrap()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn sine_dual_m2_grid() {
        let grid: Vec<f64> = (0..512).map(|i| TAU * i as f64 / 512.0).collect();
        let lp = build_coefficient_lp(Family::Sine, 2, &grid).unwrap();
        let v = solve_value(&lp);
        let c2 = cm(2).unwrap();
        assert!((c2 - 1.1547).abs() < 1e-4);
        assert!(v >= c2 - 1e-12 && v - c2 < 1e-3, "{v} vs {c2}");
    }

    #[test]
    fn float_solve_stays_feasible_on_fine_grid() {
        // Thousands of pivots over nearly parallel rows; without periodic
        // rebuilding the returned point drifts infeasible and undershoots c_8.
        let grid: Vec<f64> = (0..4096).map(|i| TAU * i as f64 / 4096.0).collect();
        let lp = build_coefficient_lp(Family::Sine, 8, &grid).unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert!(lp.is_feasible(&sol.point, 1e-9));
        let c = cm(8).unwrap();
        let v = sol.value.unwrap();
        assert!(v >= c && (v - c) / c < 1e-5, "{v} vs {c}");
    }

    #[test]
    fn exact_mode_rejects_sine() {
        assert_eq!(
            build_coefficient_lp(Family::Sine, 2, &[r(1, 2)]),
            Err(LpError::Inexact(Family::Sine))
        );
        assert_eq!(
            build_measure_lp::<f64>(Family::Sine, 2, &[]),
            Err(LpError::NoPoints)
        );
        assert!(matches!(
            build_coefficient_lp(Family::Sawtooth, 2, &[f64::NAN]),
            Err(LpError::NonFinite(_))
        ));
    }

    #[test]
    fn exact_strong_duality_small() {
        for m in 1..=32 {
            let pts = breakpoints(m).unwrap();
            let dual = build_coefficient_lp(Family::Sawtooth, m, &pts).unwrap();
            let sol = simplex_solve(&dual).unwrap();
            assert_eq!(sol.value, Some(coefficient_sum(m).unwrap()), "m = {m}");
            assert!(dual.is_feasible(&sol.point, 0.0));

            let mut support = pts.clone();
            for x in saw::extremal_measure(m).unwrap().locations() {
                if !support.contains(x) {
                    support.push(x.clone());
                }
            }
            let primal = build_measure_lp(Family::Sawtooth, m, &support).unwrap();
            let sol = simplex_solve(&primal).unwrap();
            assert_eq!(sol.value, Some(saw::bound(m).unwrap()), "m = {m}");
            assert!(primal.is_feasible(&sol.point, 0.0));
        }
    }

    #[test]
    fn extremal_atoms_are_breakpoints() {
        for m in 1..=64 {
            let pts = breakpoints(m).unwrap();
            for x in saw::extremal_measure(m).unwrap().locations() {
                assert!(pts.binary_search(x).is_ok(), "m = {m}, x = {x}");
            }
        }
    }

    #[test]
    fn sine_dual_refines_monotonically() {
        for m in [2, 3] {
            let c = cm(m).unwrap();
            let mut prev = f64::INFINITY;
            for n in [64, 128, 256, 512] {
                let grid: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
                let v = solve_value(&build_coefficient_lp(Family::Sine, m, &grid).unwrap());
                assert!(v <= prev + 1e-12 && v >= c - 1e-12, "m = {m}, n = {n}");
                prev = v;
            }
        }
    }

    fn random_sawtooth_pair(
        m: usize,
        weights: &[u32],
        masses: &[u32],
        picks: &[usize],
    ) -> (Rational, Rational) {
        let raw: Vec<Rational> = weights[..m]
            .iter()
            .map(|&w| Rational::integer(w as i64))
            .collect();
        let raw = CoefficientVector::new(Family::Sawtooth, raw).unwrap();
        let peak = verify_exact(&raw).unwrap().max_value;
        let sum = raw.sum();
        // Scale so the combination's maximum is exactly 1.
        let scaled_sum = if peak.is_positive() {
            &sum / &peak
        } else {
            sum
        };

        let pts = breakpoints(m).unwrap();
        let total: u32 = masses.iter().sum();
        let min_e = (1..=m)
            .map(|k| {
                picks
                    .iter()
                    .zip(masses)
                    .map(|(&i, &w)| {
                        Rational::frac(w as i64, total as i64)
                            * sawtooth_exact(&(&pts[i % pts.len()] * &Rational::integer(k as i64)))
                    })
                    .sum::<Rational>()
            })
            .min()
            .unwrap();
        (scaled_sum, min_e)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weak_duality_exact(
            m in 1usize..12,
            weights in prop::collection::vec(0u32..20, 12),
            masses in prop::collection::vec(1u32..20, 1..6),
            picks in prop::collection::vec(0usize..1000, 6),
        ) {
            prop_assume!(weights[..m].iter().any(|&w| w > 0));
            let (a, e) = random_sawtooth_pair(m, &weights, &masses, &picks[..masses.len()]);
            prop_assert!(&a * &e <= Rational::one());
        }

        #[test]
        fn weak_duality_sine(
            m in 1usize..10,
            weights in prop::collection::vec(0.0f64..1.0, 10),
            atoms in prop::collection::vec((0.0f64..TAU, 0.01f64..1.0), 1..6),
        ) {
            let a = CoefficientVector::new(Family::Sine, weights[..m].to_vec()).unwrap();
            prop_assume!(a.sum() > 0.0);
            // Upper bound on max f from a fine grid plus the Lipschitz slack.
            let n = 20_000;
            let peak = (0..n)
                .map(|i| crate::sine::evaluate_trig(&a, TAU * i as f64 / n as f64))
                .fold(f64::MIN, f64::max)
                + PI * a.weighted_index_sum() / n as f64;
            let total: f64 = atoms.iter().map(|p| p.1).sum();
            let min_e = (1..=m)
                .map(|k| atoms.iter().map(|&(x, w)| w / total * (k as f64 * x).sin()).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(a.sum() / peak * min_e <= 1.0 + 1e-12);
        }

        #[test]
        fn exact_solutions_are_feasible(
            rows in prop::collection::vec(prop::collection::vec(-5i64..6, 3), 1..6),
            rhs in prop::collection::vec(0i64..10, 6),
            obj in prop::collection::vec(-3i64..4, 3),
        ) {
            let n = rows.len();
            let lp = LinearProgram::new(
                obj.iter().map(|&c| Rational::integer(c)).collect(),
                rows.iter().map(|r| r.iter().map(|&x| Rational::integer(x)).collect()).collect(),
                rhs[..n].iter().map(|&b| Rational::integer(b)).collect(),
                vec![Sense::Le; n],
                vec![VarBound::NonNegative; 3],
            ).unwrap();
            let sol = simplex_solve(&lp).unwrap();
            if sol.status == LpStatus::Optimal {
                prop_assert!(lp.is_feasible(&sol.point, 0.0));
                prop_assert_eq!(sol.value.unwrap(), dot(lp.objective(), &sol.point));
            }
        }
    }
}
