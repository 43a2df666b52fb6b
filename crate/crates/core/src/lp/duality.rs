//! Solving both discretised LPs and comparing them with the closed forms.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{
    build_coefficient_lp, build_measure_lp, simplex_solve, solve_by_row_generation, LpError,
    LpStatus,
};
use crate::fracparts::Rational;
use crate::measure::Family;
use crate::sawtooth;
use crate::scalar::{as_text, Scalar};
use crate::sine;

/// Largest `m` for the exact sawtooth cross-check.
pub const MAX_SAWTOOTH_M: usize = 64;
/// Largest `m` for the floating sine cross-check.
pub const MAX_SINE_M: usize = 32;
/// Coarsest grid of the sine refinement sequence.
pub const MIN_SINE_GRID: usize = 1 << 10;
pub const DEFAULT_SINE_GRID: usize = 1 << 14;

/// Finest sine grid used when none is given: [`DEFAULT_SINE_GRID`], or
/// 1024 points per period of `sin(mx)` if that is finer.
pub fn default_sine_grid(m: usize) -> usize {
    DEFAULT_SINE_GRID.max((1024 * m).next_power_of_two())
}
/// Relative gap allowed between the finest grid LP and `c_m`, and between
/// `dual * primal` and 1.
pub const SINE_DUAL_TOLERANCE: f64 = 1e-6;
/// Absolute gap allowed between the seeded measure LP and `1/c_m`.
pub const SINE_PRIMAL_TOLERANCE: f64 = 1e-9;

/// Slack for float noise when comparing successive grid values.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStep {
    pub size: usize,
    #[serde(with = "as_text")]
    pub dual_value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
}

/// Outcome of [`duality_cross_check`]. Numbers are text: `p/q` in exact
/// mode, 17 significant digits in float mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub family: Family,
    pub m: usize,
    pub arithmetic: String,
    pub dual_value: String,
    pub primal_value: String,
    pub product: String,
    pub closed_form_dual: String,
    pub closed_form_primal: String,
    pub dual_constraints: usize,
    pub primal_support: usize,
    pub dual_iterations: usize,
    pub primal_iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grids: Vec<GridStep>,
    /// Sawtooth only: whether every extremal atom is already a breakpoint,
    /// so the breakpoint-supported measure LP needs no seeding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal_atoms_among_breakpoints: Option<bool>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

fn check(name: &str, passed: bool) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
    }
}

fn optimal<T: Scalar>(sol: super::LpSolution<T>) -> Result<(T, usize), LpError> {
    match (sol.status, sol.value) {
        (LpStatus::Optimal, Some(v)) => Ok((v, sol.iterations)),
        // Both LPs are feasible and bounded by construction.
        (status, _) => Err(LpError::Dimension(format!("solver returned {status:?}"))),
    }
}

/// Solves the dual and primal LPs for `family` and `m` and checks them
/// against the closed forms. The sawtooth runs exactly on the breakpoints;
/// the sine runs in floating point on uniform grids `2^10, 2^11, ...,
/// sine_grid` (default [`default_sine_grid`]).
pub fn duality_cross_check(
    family: Family,
    m: usize,
    sine_grid: Option<usize>,
) -> Result<DualityReport, LpError> {
    if m == 0 {
        return Err(LpError::InvalidM);
    }
    match family {
        Family::Sawtooth => sawtooth_check(m),
        Family::Sine => sine_check(m, sine_grid.unwrap_or_else(|| default_sine_grid(m))),
    }
}

fn sawtooth_check(m: usize) -> Result<DualityReport, LpError> {
    if m > MAX_SAWTOOTH_M {
        return Err(LpError::LimitExceeded {
            family: Family::Sawtooth,
            m,
            max: MAX_SAWTOOTH_M,
        });
    }
    let points = sawtooth::breakpoints(m)?;
    let (dual, dual_iterations) = optimal(simplex_solve(&build_coefficient_lp(
        Family::Sawtooth,
        m,
        &points,
    )?)?)?;

    let mut support = points.clone();
    let mut among = true;
    for x in sawtooth::extremal_measure(m)?.locations() {
        if points.binary_search(x).is_err() {
            among = false;
            support.push(x.clone());
        }
    }
    let (primal, primal_iterations) = optimal(simplex_solve(&build_measure_lp(
        Family::Sawtooth,
        m,
        &support,
    )?)?)?;

    let sum = sawtooth::coefficient_sum(m)?;
    let bound = sawtooth::bound(m)?;
    let product = &dual * &primal;
    let checks = vec![
        check("dual_equals_coefficient_sum", dual == sum),
        check("primal_equals_bound", primal == bound),
        check("product_is_one", product == Rational::one()),
    ];
    Ok(DualityReport {
        family: Family::Sawtooth,
        m,
        arithmetic: "exact".into(),
        dual_value: dual.encode(),
        primal_value: primal.encode(),
        product: product.encode(),
        closed_form_dual: sum.encode(),
        closed_form_primal: bound.encode(),
        dual_constraints: points.len(),
        primal_support: support.len(),
        dual_iterations,
        primal_iterations,
        grids: Vec::new(),
        extremal_atoms_among_breakpoints: Some(among),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Dual grid-LP values for the sine family on nested uniform grids
/// `2^10, 2^11, ..., finest` over `[0, 2pi)`.
pub fn sine_refinement(m: usize, finest: usize) -> Result<Vec<GridStep>, LpError> {
    if m == 0 {
        return Err(LpError::InvalidM);
    }
    if finest < MIN_SINE_GRID || !finest.is_power_of_two() {
        return Err(LpError::InvalidGrid {
            got: finest,
            min: MIN_SINE_GRID,
        });
    }
    let mut steps = Vec::new();
    let mut n = MIN_SINE_GRID;
    while n <= finest {
        let lp = build_coefficient_lp(Family::Sine, m, &uniform_grid(n))?;
        let (v, iterations) = optimal(solve_by_row_generation(&lp)?)?;
        steps.push(GridStep {
            size: n,
            dual_value: v,
            iterations,
        });
        n *= 2;
    }
    Ok(steps)
}

fn sine_check(m: usize, finest: usize) -> Result<DualityReport, LpError> {
    if m > MAX_SINE_M {
        return Err(LpError::LimitExceeded {
            family: Family::Sine,
            m,
            max: MAX_SINE_M,
        });
    }
    let grids = sine_refinement(m, finest)?;
    let last = grids.last().expect("at least one grid");
    let dual = last.dual_value;

    // Measures live on (0, pi): the finest grid there plus the extremal atoms.
    let mut support: Vec<f64> = (1..finest / 2)
        .map(|i| TAU * i as f64 / finest as f64)
        .collect();
    for &x in sine::sine_extremal_measure(m)?.locations() {
        if support.iter().all(|y| (x - y).abs() > 1e-12) {
            support.push(x);
        }
    }
    let (primal, primal_iterations) = optimal(simplex_solve(&build_measure_lp(
        Family::Sine,
        m,
        &support,
    )?)?)?;

    let c = sine::cm(m)?;
    let product = dual * primal;
    let monotone = grids
        .windows(2)
        .all(|w| w[1].dual_value <= w[0].dual_value * (1.0 + MONOTONE_SLACK));
    let above = grids
        .iter()
        .all(|g| g.dual_value >= c * (1.0 - MONOTONE_SLACK));
    let checks = vec![
        check("dual_nonincreasing_under_refinement", monotone),
        check("dual_at_least_cm", above),
        check(
            "dual_matches_cm",
            ((dual - c) / c).abs() <= SINE_DUAL_TOLERANCE,
        ),
        check(
            "primal_matches_inverse_cm",
            (primal - 1.0 / c).abs() <= SINE_PRIMAL_TOLERANCE,
        ),
        check(
            "product_is_one",
            (product - 1.0).abs() <= SINE_DUAL_TOLERANCE,
        ),
    ];
    Ok(DualityReport {
        family: Family::Sine,
        m,
        arithmetic: "float".into(),
        dual_value: dual.encode(),
        primal_value: primal.encode(),
        product: product.encode(),
        closed_form_dual: c.encode(),
        closed_form_primal: (1.0 / c).encode(),
        dual_constraints: finest,
        primal_support: support.len(),
        dual_iterations: last.iterations,
        primal_iterations,
        extremal_atoms_among_breakpoints: None,
        passed: checks.iter().all(|c| c.passed),
        checks,
        grids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_seven_and_eight() {
        let r = duality_cross_check(Family::Sawtooth, 7, None).unwrap();
        assert_eq!(
            (r.dual_value.as_str(), r.primal_value.as_str()),
            ("19/4", "4/19")
        );
        assert_eq!(r.product, "1");
        assert!(r.passed);
        assert_eq!(r.extremal_atoms_among_breakpoints, Some(true));

        let r = duality_cross_check(Family::Sawtooth, 8, None).unwrap();
        assert_eq!(
            (r.dual_value.as_str(), r.primal_value.as_str()),
            ("5", "1/5")
        );
        assert!(r.passed);
    }

    #[test]
    fn limits() {
        assert_eq!(
            duality_cross_check(Family::Sawtooth, 100, None),
            Err(LpError::LimitExceeded {
                family: Family::Sawtooth,
                m: 100,
                max: MAX_SAWTOOTH_M
            })
        );
        assert!(matches!(
            duality_cross_check(Family::Sine, 33, None),
            Err(LpError::LimitExceeded { .. })
        ));
        assert!(matches!(
            duality_cross_check(Family::Sine, 2, Some(3000)),
            Err(LpError::InvalidGrid { .. })
        ));
        assert_eq!(
            duality_cross_check(Family::Sawtooth, 0, None),
            Err(LpError::InvalidM)
        );
    }

    #[test]
    fn sine_four() {
        let r = duality_cross_check(Family::Sine, 4, None).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.grids.len(), 5);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"grids\""));
    }

    #[test]
    fn report_json_round_trip() {
        let r = duality_cross_check(Family::Sawtooth, 3, None).unwrap();
        let back: DualityReport =
            serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
