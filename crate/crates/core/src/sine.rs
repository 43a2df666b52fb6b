//! The optimal inequality `sum_k a_k sin(kx) <= 1`.
//!
//! The weights come from the discrete Fourier transform of a sampled square
//! wave on `Z/(2m+2)`; equivalently `f = sum a_k sin(kx)` is the Fejér-kernel
//! interpolation of the square wave through the odd multiples of
//! `pi/(m+1)`. The maximal weight sum is the cotangent sum
//! `c_m = (2/(m+1)) sum_{odd j<=m} cot(pi j/(2m+2))`.
//!
//! Validity on the whole circle is certified numerically: a grid maximum
//! plus the Lipschitz slack `L h / 2`, with `L = sum k a_k`, together with
//! residual checks of `f = 1`, `f' = 0` at the stationary points.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combination::CoefficientVector;
use crate::measure::{Atom, AtomicMeasure, Family};
use crate::sawtooth::CertificateMode;
use crate::scalar::as_text;

/// `sum a_k sin(kx)` with its weights; always tagged [`Family::Sine`].
pub type TrigCombination = CoefficientVector<f64>;

/// Euler's constant to 20 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Smallest grid accepted by [`verify_sine`].
pub const MIN_GRID: usize = 1000;
/// Smallest grid accepted by [`fejer_sign_lemma`].
pub const MIN_LEMMA_POINTS: usize = 100;
/// Residual tolerance for `f = 1` and `f' = 0` at the stationary points,
/// and for the grid maximum exceeding 1.
pub const SUPPORT_TOLERANCE: f64 = 1e-9;
/// Slack on the signs checked by [`fejer_sign_lemma`].
pub const LEMMA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SineError {
    #[error("m must be at least 1")]
    InvalidM,
    #[error("grid size {got} is below the minimum {min}")]
    GridTooSmall { got: usize, min: usize },
    #[error("k = {k} is outside 1..={m}")]
    KOutOfRange { k: usize, m: usize },
    #[error("expected a sine combination, got {0}")]
    WrongFamily(Family),
}

fn require_m(m: usize) -> Result<(), SineError> {
    if m == 0 {
        Err(SineError::InvalidM)
    } else {
        Ok(())
    }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

fn odd_up_to(m: usize) -> impl Iterator<Item = usize> {
    (1..=m).step_by(2)
}

/// The optimal weights, assembled term by term: each odd `k` contributes
/// `(2/(m+1)^2) cot(pi k/(2m+2))` times `(m+1-k)` to `a_k` and times `k` to
/// `a_{m+1-k}`.
pub fn sine_coefficients(m: usize) -> Result<TrigCombination, SineError> {
    require_m(m)?;
    let n = (m + 1) as f64;
    let mut a = vec![0.0; m];
    for k in odd_up_to(m) {
        let c = 2.0 / (n * n) * cot(PI * k as f64 / (2.0 * n));
        a[k - 1] += c * (m + 1 - k) as f64;
        a[m - k] += c * k as f64;
    }
    Ok(CoefficientVector::new(Family::Sine, a).expect("cotangents are positive"))
}

/// The same weights from the closed form
/// `a_k = 4(m+1-k)/(m+1)^2 * sin^2(ceil(m/2) k pi/(m+1)) / sin(pi k/(m+1))`.
pub fn sine_coefficients_alt(m: usize) -> Result<TrigCombination, SineError> {
    require_m(m)?;
    let n = (m + 1) as f64;
    let half = m.div_ceil(2);
    let a = (1..=m)
        .map(|k| {
            // Reduce the numerator angle mod pi before scaling.
            let num = ((half * k) % (m + 1)) as f64 * PI / n;
            4.0 * (m + 1 - k) as f64 / (n * n) * num.sin().powi(2) / (PI * k as f64 / n).sin()
        })
        .collect();
    Ok(CoefficientVector::new(Family::Sine, a).expect("weights are nonnegative"))
}

/// The cotangent sum `c_m`: the maximal weight sum.
pub fn cm(m: usize) -> Result<f64, SineError> {
    require_m(m)?;
    let n = (m + 1) as f64;
    let total: f64 = odd_up_to(m).map(|j| cot(PI * j as f64 / (2.0 * n))).sum();
    Ok(2.0 / n * total)
}

/// `(2/pi) log(m+1) + (2/pi)(log(4/pi) + gamma)`.
pub fn cm_asymptotic(m: usize) -> Result<f64, SineError> {
    require_m(m)?;
    Ok(2.0 / PI * ((m + 1) as f64).ln() + cm_asymptotic_constant())
}

pub fn cm_asymptotic_constant() -> f64 {
    2.0 / PI * ((4.0 / PI).ln() + EULER_GAMMA)
}

/// Mass `(2/((m+1) c_m)) cot(pi j/(2m+2))` at `pi j/(m+1)` for odd `j <= m`.
pub fn sine_extremal_measure(m: usize) -> Result<AtomicMeasure<f64>, SineError> {
    let c = cm(m)?;
    let n = (m + 1) as f64;
    let atoms = odd_up_to(m)
        .map(|j| Atom {
            x: PI * j as f64 / n,
            mass: 2.0 / (n * c) * cot(PI * j as f64 / (2.0 * n)),
        })
        .collect();
    Ok(AtomicMeasure::new(atoms).expect("masses sum to one"))
}

fn reduce_angle(x: f64) -> f64 {
    if x.abs() > 1e6 {
        x.rem_euclid(TAU)
    } else {
        x
    }
}

/// `f(x) = sum a_k sin(kx)` by direct summation.
pub fn evaluate_trig(a: &TrigCombination, x: f64) -> f64 {
    let x = reduce_angle(x);
    a.iter().map(|(k, c)| c * (k as f64 * x).sin()).sum()
}

/// `f'(x) = sum k a_k cos(kx)`.
pub fn evaluate_trig_derivative(a: &TrigCombination, x: f64) -> f64 {
    let x = reduce_angle(x);
    a.iter()
        .map(|(k, c)| k as f64 * c * (k as f64 * x).cos())
        .sum()
}

/// Clenshaw recurrence for `sum a_k sin(kx)`; used on large grids.
fn clenshaw_sine(a: &[f64], x: f64) -> f64 {
    let two_cos = 2.0 * x.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in a.iter().rev() {
        let b0 = c + two_cos * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1 * x.sin()
}

/// DFT of the sampled square wave `sigma_m` on `Z/(2m+2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareWaveSpectrum {
    pub m: usize,
    /// Closed-form values indexed by `j = 0..2m+2`.
    pub values: Vec<Complex64>,
    /// Largest `|direct - closed form|` over all `j`.
    pub direct_deviation: f64,
}

impl SquareWaveSpectrum {
    /// Value at any integer `j`, read modulo `2m+2`.
    pub fn value(&self, j: i64) -> Complex64 {
        let n = self.values.len() as i64;
        self.values[j.rem_euclid(n) as usize]
    }
}

/// `sigma_m(k)`: 1 on `1..=m`, -1 on `-m..=-1`, 0 at 0 and `m+1`.
pub fn square_wave_sample(m: usize, k: i64) -> f64 {
    let n = 2 * m as i64 + 2;
    let k = k.rem_euclid(n);
    match k {
        0 => 0.0,
        k if k <= m as i64 => 1.0,
        k if k == m as i64 + 1 => 0.0,
        _ => -1.0,
    }
}

/// The 2π-periodic square wave: 1 on `(0, pi)`, -1 on `(pi, 2 pi)`, 0 at
/// the jumps.
pub fn square_wave(x: f64) -> f64 {
    let t = (x / TAU).rem_euclid(1.0);
    if t == 0.0 || t == 0.5 {
        0.0
    } else if t < 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// `(1/(2m+2)) sum_k sigma_m(k) zeta^{-jk}` summed directly.
pub fn square_wave_dft_direct(m: usize) -> Result<Vec<Complex64>, SineError> {
    require_m(m)?;
    let n = 2 * m + 2;
    Ok((0..n)
        .map(|j| {
            let sum: Complex64 = (0..n)
                .map(|k| {
                    let phase = -TAU * ((j * k) % n) as f64 / n as f64;
                    Complex64::from_polar(square_wave_sample(m, k as i64), phase)
                })
                .sum();
            sum / n as f64
        })
        .collect())
}

/// Closed form: `(-i/(m+1)) cot(pi j/(2m+2))` for odd `j`, 0 for even `j`.
pub fn square_wave_dft_closed(m: usize, j: i64) -> Complex64 {
    let n = 2 * m as i64 + 2;
    let j = j.rem_euclid(n);
    if j % 2 == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, -cot(PI * j as f64 / n as f64) / (m + 1) as f64)
    }
}

pub fn square_wave_dft(m: usize) -> Result<SquareWaveSpectrum, SineError> {
    let direct = square_wave_dft_direct(m)?;
    let values: Vec<_> = (0..direct.len() as i64)
        .map(|j| square_wave_dft_closed(m, j))
        .collect();
    let direct_deviation = direct
        .iter()
        .zip(&values)
        .map(|(d, c)| (d - c).norm())
        .fold(0.0, f64::max);
    Ok(SquareWaveSpectrum {
        m,
        values,
        direct_deviation,
    })
}

/// `sum_{odd j<=m} (2/(m+1)) cot(pi j/(2m+2)) sin(pi j k/(m+1))`, which
/// inverts the square-wave transform at `k` and so equals 1.
pub fn eisenstein_identity_check(m: usize, k: usize) -> Result<f64, SineError> {
    require_m(m)?;
    if !(1..=m).contains(&k) {
        return Err(SineError::KOutOfRange { k, m });
    }
    let n = m + 1;
    Ok(odd_up_to(m)
        .map(|j| {
            let angle = PI * ((j * k) % (2 * n)) as f64 / n as f64;
            2.0 / n as f64 * cot(PI * j as f64 / (2 * n) as f64) * angle.sin()
        })
        .sum())
}

/// Fejér kernel `F_{m+1}(x) = (1/(m+1)) (sin((m+1)x/2) / sin(x/2))^2`.
pub fn fejer_kernel(m: usize, x: f64) -> f64 {
    let n = (m + 1) as f64;
    let x = reduce_angle(x);
    let s = (x / 2.0).sin();
    if s.abs() < 1e-9 {
        // sin(n t)/sin(t) = ±n (1 - (n^2 - 1) sin^2(t)/6 + ...) near t = pi Z.
        let d = n * (1.0 - (n * n - 1.0) * s * s / 6.0);
        return d * d / n;
    }
    let ratio = (n * x / 2.0).sin() / s;
    ratio * ratio / n
}

/// `(1/(m+1)) sum_{odd j<2m+2} S(pi j/(m+1)) F_{m+1}(x - pi j/(m+1))`: the
/// modulated Dirac comb convolved with the Fejér kernel.
pub fn fejer_interpolant(m: usize, x: f64) -> Result<f64, SineError> {
    require_m(m)?;
    let n = (m + 1) as f64;
    let x = reduce_angle(x);
    let total: f64 = (1..2 * m + 2)
        .step_by(2)
        .map(|j| {
            let weight = square_wave_sample(m, j as i64);
            if weight == 0.0 {
                0.0
            } else {
                weight * fejer_kernel(m, x - PI * j as f64 / n)
            }
        })
        .sum();
    Ok(total / n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FejerSignReport {
    pub m: usize,
    pub n_points: usize,
    /// Smallest value on the region where the combination is nonnegative.
    #[serde(with = "as_text")]
    pub min_on_nonnegative_region: f64,
    /// Largest value on the region where it is nonpositive.
    #[serde(with = "as_text")]
    pub max_on_nonpositive_region: f64,
    pub passed: bool,
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Grid check of the sign pattern of the Fejér-kernel differences:
/// for odd `m`, `F(x) - F(x - pi)` is `>= 0` on `[-pi/2, pi/2]` and `<= 0`
/// on `[pi/2, 3pi/2]`; for even `m`,
/// `2F(x) - F(x - m pi/(m+1)) - F(x - (m+2) pi/(m+1))` is `>= 0` on
/// `[-pi/2 + pi/(m+1), pi/2 - pi/(m+1)]` and `<= 0` on
/// `[pi/2 + pi/(m+1), 3pi/2 - pi/(m+1)]`.
pub fn fejer_sign_lemma(m: usize, n_points: usize) -> Result<FejerSignReport, SineError> {
    require_m(m)?;
    if n_points < MIN_LEMMA_POINTS {
        return Err(SineError::GridTooSmall {
            got: n_points,
            min: MIN_LEMMA_POINTS,
        });
    }
    let n = (m + 1) as f64;
    let (shrink, diff): (f64, Box<dyn Fn(f64) -> f64>) = if m % 2 == 1 {
        (
            0.0,
            Box::new(move |x| fejer_kernel(m, x) - fejer_kernel(m, x - PI)),
        )
    } else {
        (
            PI / n,
            Box::new(move |x| {
                2.0 * fejer_kernel(m, x)
                    - fejer_kernel(m, x - m as f64 * PI / n)
                    - fejer_kernel(m, x - (m + 2) as f64 * PI / n)
            }),
        )
    };
    let min_nonneg = grid(-PI / 2.0 + shrink, PI / 2.0 - shrink, n_points)
        .map(&diff)
        .fold(f64::INFINITY, f64::min);
    let max_nonpos = grid(PI / 2.0 + shrink, 1.5 * PI - shrink, n_points)
        .map(&diff)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FejerSignReport {
        m,
        n_points,
        min_on_nonnegative_region: min_nonneg,
        max_on_nonpositive_region: max_nonpos,
        passed: min_nonneg >= -LEMMA_TOLERANCE && max_nonpos <= LEMMA_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportResidual {
    #[serde(with = "as_text")]
    pub x: f64,
    /// `|f(x) - 1|`
    #[serde(with = "as_text")]
    pub value: f64,
    /// `|f'(x)|`
    #[serde(with = "as_text")]
    pub derivative: f64,
}

/// Numerical certificate for `f <= 1` on the circle.
///
/// The grid is the uniform grid `2 pi i / N` together with the stationary
/// points `pi j/(m+1)`; every real `x` lies within `pi/N` of a uniform grid
/// point, so `sup f <= grid_max + pi L / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCertificate {
    pub mode: CertificateMode,
    pub m: usize,
    pub grid_size: usize,
    #[serde(with = "as_text")]
    pub grid_max: f64,
    #[serde(with = "as_text")]
    pub argmax: f64,
    #[serde(with = "as_text")]
    pub grid_min: f64,
    #[serde(rename = "L", with = "as_text")]
    pub lipschitz_constant: f64,
    #[serde(with = "as_text")]
    pub certified_upper_bound: f64,
    /// Declared tolerance: the check is
    /// `certified_upper_bound <= 1 + pi L / N + tolerance`.
    #[serde(with = "as_text")]
    pub tolerance: f64,
    pub support_residuals: Vec<SupportResidual>,
    /// `|f(0)|` and `|f(pi)|`.
    #[serde(with = "crate::scalar::vec_as_text")]
    pub endpoint_values: Vec<f64>,
    pub passed: bool,
}

#[derive(Clone, Copy)]
struct Extremes {
    max: f64,
    max_at: usize,
    min: f64,
}

impl Extremes {
    fn at(i: usize, v: f64) -> Self {
        Extremes {
            max: v,
            max_at: i,
            min: v,
        }
    }

    // Associative and commutative, so the parallel result does not depend on
    // the split. Ties go to the smaller index.
    fn merge(self, other: Self) -> Self {
        let (max, max_at) = match self.max.total_cmp(&other.max) {
            Ordering::Greater => (self.max, self.max_at),
            Ordering::Less => (other.max, other.max_at),
            Ordering::Equal => (self.max, self.max_at.min(other.max_at)),
        };
        Extremes {
            max,
            max_at,
            min: self.min.min(other.min),
        }
    }
}

/// Certifies `sum a_k sin(kx) <= 1` for the optimal weights of order `m` on a
/// grid of `grid_size` points over one period.
pub fn verify_sine(m: usize, grid_size: usize) -> Result<GridCertificate, SineError> {
    let a = sine_coefficients(m)?;
    verify_combination(&a, grid_size)
}

/// [`verify_sine`] for an arbitrary sine combination. Support residuals are
/// taken at the stationary points `pi j/(m+1)`, odd `j <= m`.
pub fn verify_combination(
    a: &TrigCombination,
    grid_size: usize,
) -> Result<GridCertificate, SineError> {
    if a.family() != Family::Sine {
        return Err(SineError::WrongFamily(a.family()));
    }
    if grid_size < MIN_GRID {
        return Err(SineError::GridTooSmall {
            got: grid_size,
            min: MIN_GRID,
        });
    }
    let m = a.m();
    let coeffs = a.coeffs();
    let step = TAU / grid_size as f64;
    let uniform = (0..grid_size)
        .into_par_iter()
        .map(|i| Extremes::at(i, clenshaw_sine(coeffs, i as f64 * step)))
        .reduce_with(Extremes::merge)
        .expect("nonempty grid");

    let n = (m + 1) as f64;
    let support_residuals: Vec<_> = odd_up_to(m)
        .map(|j| {
            let x = PI * j as f64 / n;
            SupportResidual {
                x,
                value: (evaluate_trig(a, x) - 1.0).abs(),
                derivative: evaluate_trig_derivative(a, x).abs(),
            }
        })
        .collect();

    let (mut grid_max, mut argmax) = (uniform.max, uniform.max_at as f64 * step);
    for r in &support_residuals {
        let v = evaluate_trig(a, r.x);
        if v > grid_max || (v == grid_max && r.x < argmax) {
            grid_max = v;
            argmax = r.x;
        }
    }

    let lipschitz_constant = a.weighted_index_sum();
    let slack = PI * lipschitz_constant / grid_size as f64;
    let certified_upper_bound = grid_max + slack;
    let endpoint_values = vec![evaluate_trig(a, 0.0).abs(), evaluate_trig(a, PI).abs()];
    let passed = certified_upper_bound <= 1.0 + slack + SUPPORT_TOLERANCE
        && uniform.min >= -1.0 - slack
        && support_residuals
            .iter()
            .all(|r| r.value < SUPPORT_TOLERANCE && r.derivative < SUPPORT_TOLERANCE)
        && endpoint_values.iter().all(|v| *v < SUPPORT_TOLERANCE);

    Ok(GridCertificate {
        mode: CertificateMode::CertifiedGrid,
        m,
        grid_size,
        grid_max,
        argmax,
        grid_min: uniform.min,
        lipschitz_constant,
        certified_upper_bound,
        tolerance: SUPPORT_TOLERANCE,
        support_residuals,
        endpoint_values,
        passed,
    })
}

/// `E_mu sin(kx)`.
pub fn sine_expectation(mu: &AtomicMeasure<f64>, k: usize) -> f64 {
    mu.integrate(|x| (k as f64 * x).sin())
}
