//! Optimal inequalities `sum_k b_k g(kx) <= 1` for the sawtooth `g`, the
//! matching extremal measures, and exact verification.
//!
//! For `2^r < m <= 2^{r+1}` the optimal combination is
//!
//! ```text
//! 2 g(x) + sum_{j=1}^{r} g(2^j x)
//!        + sum_{l=2^r+1}^{m} m/(l(l-1)) * (g(lx) + g((2^{r+1}+1-l)x) - g(x))
//! ```
//!
//! whose weights sum to `r + 1 + m/2^r`. The sharp bound on
//! `min_k E g(kx)` over probability measures is the reciprocal of that sum.
//!
//! Verification is exact. Between consecutive jumps a nonnegative
//! combination is affine and nondecreasing, and `g` is left-continuous, so
//! the supremum over a period is the largest value at a jump location.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combination::{CoefficientVector, CombinationError};
use crate::fracparts::{sawtooth, sawtooth_exact, sawtooth_residue, FracError, Rational};
use crate::measure::{Atom, AtomicMeasure, Family};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SawtoothError {
    #[error("m must be at least {min}, got {m}")]
    InvalidM { m: usize, min: usize },
    #[error("expected a sawtooth combination, got {0}")]
    WrongFamily(Family),
    #[error(transparent)]
    Combination(#[from] CombinationError),
    #[error(transparent)]
    Frac(#[from] FracError),
}

/// The unique `r` with `2^r < m <= 2^{r+1}`, for `m >= 2`.
pub fn level(m: usize) -> Result<u32, SawtoothError> {
    if m < 2 {
        return Err(SawtoothError::InvalidM { m, min: 2 });
    }
    Ok((m - 1).ilog2())
}

fn require_m(m: usize) -> Result<(), SawtoothError> {
    if m == 0 {
        Err(SawtoothError::InvalidM { m, min: 1 })
    } else {
        Ok(())
    }
}

fn pow2(r: u32) -> Rational {
    Rational::integer(BigInt::one() << r)
}

/// Weights of `2 g(x) + sum_{j=1}^r g(2^j x)`, with `m = 2^r`.
pub fn coefficients_pow2(r: u32) -> CoefficientVector<Rational> {
    let m = 1usize << r;
    let mut b = vec![Rational::zero(); m];
    b[0] = Rational::integer(2);
    for j in 1..=r {
        b[(1usize << j) - 1] += &Rational::one();
    }
    CoefficientVector::new(Family::Sawtooth, b).expect("weights are nonnegative")
}

/// The optimal weights for general `m`, with repeated dilations collapsed
/// onto a single weight per index. `m = 1` gives `[2]`.
pub fn coefficients(m: usize) -> Result<CoefficientVector<Rational>, SawtoothError> {
    require_m(m)?;
    if m == 1 {
        return Ok(coefficients_pow2(0));
    }
    let r = level(m)?;
    let top = 1usize << (r + 1);
    let mut b = vec![Rational::zero(); m];
    b[0] = Rational::integer(2);
    for j in 1..=r {
        b[(1usize << j) - 1] += &Rational::one();
    }
    let m_q = Rational::integer(m as i64);
    for l in (1usize << r) + 1..=m {
        let w = &m_q / &Rational::integer((l * (l - 1)) as i64);
        b[l - 1] += &w;
        b[top - l] += &w;
        b[0] -= &w;
    }
    Ok(CoefficientVector::new(Family::Sawtooth, b)?)
}

/// `r + 1 + m/2^r`, or 2 when `m = 1`.
pub fn coefficient_sum(m: usize) -> Result<Rational, SawtoothError> {
    require_m(m)?;
    if m == 1 {
        return Ok(Rational::integer(2));
    }
    let r = level(m)?;
    Ok(Rational::integer(r as i64 + 1) + Rational::integer(m as i64) / pow2(r))
}

/// Sharp bound on `min_{k<=m} E g(kx)`: `2^r / ((r+1) 2^r + m)`.
pub fn bound(m: usize) -> Result<Rational, SawtoothError> {
    require_m(m)?;
    if m == 1 {
        return Ok(Rational::frac(1, 2));
    }
    let r = level(m)?;
    let p = pow2(r);
    let denom = &p * &Rational::integer(r as i64 + 1) + Rational::integer(m as i64);
    Ok(&p / &denom)
}

/// The measure attaining [`bound`]: mass `2^r/((r+1)2^r+m)` at each of
/// `1/2, 1/4, ..., 1/2^{r+1}` and the rest at `1/(2m)`.
pub fn extremal_measure(m: usize) -> Result<AtomicMeasure<Rational>, SawtoothError> {
    require_m(m)?;
    if m == 1 {
        return Ok(AtomicMeasure::dirac(Rational::frac(1, 2)));
    }
    let r = level(m)?;
    let p = pow2(r);
    let denom = &p * &Rational::integer(r as i64 + 1) + Rational::integer(m as i64);
    let small = &p / &denom;
    let mut atoms: Vec<_> = (1..=r + 1)
        .map(|j| Atom {
            x: pow2(j).recip().expect("nonzero"),
            mass: small.clone(),
        })
        .collect();
    atoms.push(Atom {
        x: Rational::frac(1, 2 * m as i64),
        mass: Rational::integer(m as i64) / denom,
    });
    Ok(AtomicMeasure::new(atoms).expect("masses sum to one"))
}

fn require_sawtooth(b: &CoefficientVector<Rational>) -> Result<(), SawtoothError> {
    match b.family() {
        Family::Sawtooth => Ok(()),
        other => Err(SawtoothError::WrongFamily(other)),
    }
}

/// `sum_k b_k g(kx)`, exactly.
pub fn evaluate_exact(b: &CoefficientVector<Rational>, x: &Rational) -> Rational {
    b.iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| c * &sawtooth_exact(&(x * &Rational::integer(k as i64))))
        .sum()
}

/// `sum_k b_k g(kx)` in floating point.
pub fn evaluate(b: &CoefficientVector<Rational>, x: f64) -> Result<f64, SawtoothError> {
    let mut acc = 0.0;
    for (k, c) in b.iter() {
        acc += c.to_f64() * sawtooth(k as f64 * x)?;
    }
    Ok(acc)
}

/// Right-hand limit `lim_{y -> x+} sum_k b_k g(ky)`. Differs from the value
/// at `x` by the weights of the dilations that jump there.
pub fn right_limit_exact(b: &CoefficientVector<Rational>, x: &Rational) -> Rational {
    let half = Rational::frac(1, 2);
    let mut value = evaluate_exact(b, x);
    for (k, c) in b.iter() {
        if (&(x * &Rational::integer(k as i64)) - &half).is_integer() {
            value -= c;
        }
    }
    value
}

/// Jump locations of `x -> sum_{k<=m} b_k g(kx)` in `[0, 1)`: every
/// `(2n+1)/(2k)` with `k <= m`, reduced, sorted and deduplicated.
pub fn breakpoints(m: usize) -> Result<Vec<Rational>, SawtoothError> {
    require_m(m)?;
    let mut pts: Vec<(u64, u64)> = Vec::with_capacity(m * (m + 1) / 2);
    for k in 1..=m as u64 {
        for n in 0..k {
            let (p, q) = (2 * n + 1, 2 * k);
            let g = p.gcd(&q);
            pts.push((p / g, q / g));
        }
    }
    pts.sort_unstable_by(|a, b| (a.0 as u128 * b.1 as u128).cmp(&(b.0 as u128 * a.1 as u128)));
    pts.dedup();
    Ok(pts
        .into_iter()
        .map(|(p, q)| Rational::frac(p as i64, q as i64))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMode {
    Exact,
    CertifiedGrid,
}

/// Result of an exact max-bound check on a sawtooth combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCertificate {
    pub mode: CertificateMode,
    #[serde(rename = "max")]
    pub max_value: Rational,
    pub argmax: Vec<Rational>,
    pub passed: bool,
}

/// Exact maximum of `sum_k b_k g(kx)` over a period, with every location
/// where it is attained. Passes when the maximum is at most 1.
pub fn verify_exact(
    b: &CoefficientVector<Rational>,
) -> Result<VerificationCertificate, SawtoothError> {
    require_sawtooth(b)?;
    let points = breakpoints(b.m())?;

    // Scale to integer weights: sum_k b_k g(kp/q) = sum_k B_k s_k / (D q)
    // with D the common denominator, B_k = D b_k and s_k = q g(kp/q).
    let common = b
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled: Vec<(i64, BigInt)> = b
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k as i64, c.numer() * (&common / c.denom())))
        .collect();

    let values: Vec<Rational> = points
        .par_iter()
        .map(|x| {
            let (p, q) = (x.numer(), x.denom());
            let mut acc = BigInt::zero();
            for (k, w) in &scaled {
                acc += w * sawtooth_residue(&(p * k), q);
            }
            Rational::new(acc, &common * q).expect("positive denominator")
        })
        .collect();

    let max_value = values
        .iter()
        .max()
        .cloned()
        .expect("at least one breakpoint");
    let argmax = points
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v == max_value)
        .map(|(x, _)| x.clone())
        .collect();
    let passed = max_value <= Rational::one();
    Ok(VerificationCertificate {
        mode: CertificateMode::Exact,
        max_value,
        argmax,
        passed,
    })
}

/// `E_mu g(kx)`, exactly.
pub fn expectation_exact(mu: &AtomicMeasure<Rational>, k: usize) -> Rational {
    let k = Rational::integer(k as i64);
    mu.integrate(|x| sawtooth_exact(&(x * &k)))
}

/// `E_mu g(kx)` for a floating-point measure.
pub fn expectation(mu: &AtomicMeasure<f64>, k: usize) -> Result<f64, SawtoothError> {
    let mut acc = 0.0;
    for a in mu.atoms() {
        acc += a.mass * sawtooth(k as f64 * a.x)?;
    }
    Ok(acc)
}

/// Smallest `k <= m` minimising `|g(kx)|`, with that minimum.
pub fn dirichlet_min(x: f64, m: usize) -> Result<(usize, f64), SawtoothError> {
    require_m(m)?;
    let mut best = (1, sawtooth(x)?.abs());
    for k in 2..=m {
        let v = sawtooth(k as f64 * x)?.abs();
        if v < best.1 {
            best = (k, v);
        }
    }
    Ok(best)
}

/// `sum_{k<=m} g(k/2)` by direct summation.
pub fn unweighted_sum_at_half(m: usize) -> Result<Rational, SawtoothError> {
    require_m(m)?;
    Ok((1..=m as i64)
        .map(|k| sawtooth_exact(&Rational::frac(k, 2)))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn qs(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(n, d)| q(n, d)).collect()
    }

    /// Evaluates the uncollapsed combination term by term.
    fn raw_combination(m: usize, x: &Rational) -> Rational {
        let g = |k: usize| sawtooth_exact(&(x * &Rational::integer(k as i64)));
        if m == 1 {
            return &Rational::integer(2) * &g(1);
        }
        let r = level(m).unwrap();
        let mut acc = &Rational::integer(2) * &g(1);
        for j in 1..=r {
            acc += &g(1 << j);
        }
        for l in (1usize << r) + 1..=m {
            let w = q(m as i64, (l * (l - 1)) as i64);
            let inner = g(l) + g((1usize << (r + 1)) + 1 - l) - g(1);
            acc += &(&w * &inner);
        }
        acc
    }

    /// Max over the grid i/(2L), L = lcm(1..m), which contains every jump.
    fn brute_force_max(b: &CoefficientVector<Rational>) -> Rational {
        let l = (1..=b.m() as i64).fold(1i64, |acc, k| acc.lcm(&k));
        (0..2 * l)
            .map(|i| evaluate_exact(b, &q(i, 2 * l)))
            .max()
            .unwrap()
    }

    #[test]
    fn level_examples() {
        assert_eq!(level(7).unwrap(), 2);
        assert_eq!(level(8).unwrap(), 2);
        assert_eq!(level(9).unwrap(), 3);
        assert_eq!(level(2).unwrap(), 0);
        assert!(level(1).is_err());
        assert!(level(0).is_err());
    }

    #[test]
    fn pow2_examples() {
        assert_eq!(coefficients_pow2(0).coeffs(), qs(&[(2, 1)]).as_slice());
        assert_eq!(
            coefficients_pow2(1).coeffs(),
            qs(&[(2, 1), (1, 1)]).as_slice()
        );
        let b = coefficients_pow2(3);
        let mut expected = vec![Rational::zero(); 8];
        expected[0] = q(2, 1);
        expected[1] = q(1, 1);
        expected[3] = q(1, 1);
        expected[7] = q(1, 1);
        assert_eq!(b.coeffs(), expected.as_slice());
        for r in 0..8 {
            assert_eq!(coefficients_pow2(r).sum(), Rational::integer(r as i64 + 2));
        }
    }

    #[test]
    fn coefficients_m7() {
        let b = coefficients(7).unwrap();
        assert_eq!(
            b.coeffs(),
            qs(&[(5, 4), (7, 6), (7, 30), (27, 20), (7, 20), (7, 30), (1, 6)]).as_slice()
        );
        assert_eq!(b.sum(), q(19, 4));
    }

    #[test]
    fn coefficients_degenerate_and_m8() {
        assert_eq!(coefficients(1).unwrap().coeffs(), qs(&[(2, 1)]).as_slice());
        assert!(coefficients(0).is_err());
        let b = coefficients(8).unwrap();
        assert_eq!(b.sum(), q(5, 1));
        assert_ne!(b, coefficients_pow2(3));
    }

    #[test]
    fn collapsed_matches_raw_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..=40 {
            let b = coefficients(m).unwrap();
            for _ in 0..50 {
                let x = q(rng.gen_range(-3000..3000), rng.gen_range(1..500));
                assert_eq!(
                    evaluate_exact(&b, &x),
                    raw_combination(m, &x),
                    "m={m} x={x}"
                );
            }
        }
    }

    #[test]
    fn sum_bound_examples() {
        assert_eq!(coefficient_sum(7).unwrap(), q(19, 4));
        assert_eq!(coefficient_sum(8).unwrap(), q(5, 1));
        assert_eq!(coefficient_sum(1).unwrap(), q(2, 1));
        assert_eq!(bound(7).unwrap(), q(4, 19));
        assert_eq!(bound(8).unwrap(), q(1, 5));
        assert_eq!(bound(1).unwrap(), q(1, 2));
        assert!(bound(0).is_err());
    }

    #[test]
    fn optimality_interlock() {
        for m in 1..=64 {
            let s = coefficient_sum(m).unwrap();
            assert_eq!(&s * &bound(m).unwrap(), Rational::one());
            assert_eq!(coefficients(m).unwrap().sum(), s);
        }
    }

    #[test]
    fn index_one_weight() {
        // Net weight on g(x): 3 - m/2^r, plus the 1/(m-1) that lands back on
        // index 1 from l = 2^{r+1} when m is a power of two.
        for m in 2..=64usize {
            let r = level(m).unwrap();
            let net = Rational::integer(3) - q(m as i64, 1 << r);
            assert!(net >= Rational::one());
            let b1 = coefficients(m).unwrap().get(1).clone();
            let expected = if m.is_power_of_two() {
                &net + &q(1, m as i64 - 1)
            } else {
                net
            };
            assert_eq!(b1, expected, "m = {m}");
        }
    }

    #[test]
    fn measure_examples() {
        let mu = extremal_measure(7).unwrap();
        let atoms: Vec<_> = mu
            .atoms()
            .iter()
            .map(|a| (a.x.clone(), a.mass.clone()))
            .collect();
        assert_eq!(
            atoms,
            vec![
                (q(1, 2), q(4, 19)),
                (q(1, 4), q(4, 19)),
                (q(1, 8), q(4, 19)),
                (q(1, 14), q(7, 19)),
            ]
        );
        let mu = extremal_measure(8).unwrap();
        let atoms: Vec<_> = mu
            .atoms()
            .iter()
            .map(|a| (a.x.clone(), a.mass.clone()))
            .collect();
        assert_eq!(
            atoms,
            vec![
                (q(1, 2), q(1, 5)),
                (q(1, 4), q(1, 5)),
                (q(1, 8), q(1, 5)),
                (q(1, 16), q(2, 5)),
            ]
        );
        let mu = extremal_measure(1).unwrap();
        assert_eq!(
            mu.atoms(),
            &[Atom {
                x: q(1, 2),
                mass: q(1, 1)
            }]
        );
    }

    #[test]
    fn evaluate_examples() {
        let b7 = coefficients(7).unwrap();
        assert_eq!(evaluate_exact(&b7, &q(1, 14)), Rational::one());
        let b8 = coefficients_pow2(3);
        assert_eq!(evaluate_exact(&b8, &q(1, 16)), Rational::one());
        assert!(evaluate_exact(&b7, &Rational::zero()).is_zero());
        assert_eq!(evaluate(&b7, 0.0).unwrap(), 0.0);
        let x = q(3, 17);
        assert!(
            (evaluate(&b7, x.to_f64()).unwrap() - evaluate_exact(&b7, &x).to_f64()).abs() < 1e-12
        );
        assert!(evaluate(&b7, f64::NAN).is_err());
    }

    #[test]
    fn breakpoint_examples() {
        assert_eq!(breakpoints(1).unwrap(), qs(&[(1, 2)]));
        assert_eq!(breakpoints(2).unwrap(), qs(&[(1, 4), (1, 2), (3, 4)]));
        assert_eq!(
            breakpoints(3).unwrap(),
            qs(&[(1, 6), (1, 4), (1, 2), (3, 4), (5, 6)])
        );
    }

    #[test]
    fn breakpoints_are_the_jumps() {
        // Enumerate (2n+1)/(2k) independently through a set.
        for m in 1..=20usize {
            let mut set = std::collections::BTreeSet::new();
            for k in 1..=m as i64 {
                for n in -3 * k..3 * k {
                    let x = q(2 * n + 1, 2 * k);
                    let x = &x - &Rational::integer(x.floor());
                    set.insert(x);
                }
            }
            let expected: Vec<_> = set.into_iter().collect();
            assert_eq!(breakpoints(m).unwrap(), expected);
        }
    }

    #[test]
    fn verify_examples() {
        let c = verify_exact(&coefficients(7).unwrap()).unwrap();
        assert!(c.passed);
        assert_eq!(c.max_value, Rational::one());
        for x in qs(&[(1, 14), (1, 8), (1, 4), (1, 2)]) {
            assert!(c.argmax.contains(&x), "{x}");
        }
        let c = verify_exact(&coefficients_pow2(3)).unwrap();
        assert!(c.passed);
        assert_eq!(c.max_value, Rational::one());
        for x in qs(&[(1, 16), (1, 8), (1, 4), (1, 2)]) {
            assert!(c.argmax.contains(&x), "{x}");
        }
        let b = CoefficientVector::new(Family::Sawtooth, vec![Rational::integer(3)]).unwrap();
        let c = verify_exact(&b).unwrap();
        assert_eq!(c.max_value, q(3, 2));
        assert!(!c.passed);
    }

    #[test]
    fn verify_rejects_sine_family() {
        let b = CoefficientVector::new(Family::Sine, vec![Rational::one()]).unwrap();
        assert_eq!(
            verify_exact(&b),
            Err(SawtoothError::WrongFamily(Family::Sine))
        );
    }

    #[test]
    fn verify_matches_brute_force_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 1..=10 {
            let b = coefficients(m).unwrap();
            assert_eq!(verify_exact(&b).unwrap().max_value, brute_force_max(&b));
            let random: Vec<_> = (0..m)
                .map(|_| q(rng.gen_range(0..40), rng.gen_range(1..9)))
                .collect();
            let b = CoefficientVector::new(Family::Sawtooth, random).unwrap();
            assert_eq!(verify_exact(&b).unwrap().max_value, brute_force_max(&b));
        }
    }

    #[test]
    fn verify_certificate_json() {
        let c = verify_exact(&coefficients(1).unwrap()).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(
            s,
            r#"{"mode":"exact","max":"1","argmax":["1/2"],"passed":true}"#
        );
        assert_eq!(
            serde_json::from_str::<VerificationCertificate>(&s).unwrap(),
            c
        );
    }

    #[test]
    fn right_limit_drops_by_jump_weights() {
        let b = coefficients(7).unwrap();
        // At 1/2 the odd dilations jump by -1 each.
        let odd: Rational = b
            .iter()
            .filter(|(k, _)| k % 2 == 1)
            .map(|(_, c)| c.clone())
            .sum();
        let x = q(1, 2);
        assert_eq!(right_limit_exact(&b, &x), evaluate_exact(&b, &x) - odd);
        let eps = q(1, 1_000_000);
        let near = evaluate_exact(&b, &(&x + &eps));
        assert!((near - right_limit_exact(&b, &x)).abs() < q(1, 1000));
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(
            expectation_exact(&extremal_measure(7).unwrap(), 3),
            q(4, 19)
        );
        assert_eq!(expectation_exact(&extremal_measure(8).unwrap(), 5), q(1, 5));
        assert!(expectation_exact(&AtomicMeasure::dirac(q(1, 2)), 2).is_zero());
        let mu = AtomicMeasure::dirac(0.5);
        assert_eq!(expectation(&mu, 1).unwrap(), 0.5);
    }

    #[test]
    fn extremal_measure_equality() {
        for m in 1..=64 {
            let mu = extremal_measure(m).unwrap();
            let lambda = bound(m).unwrap();
            for k in 1..=m {
                assert_eq!(expectation_exact(&mu, k), lambda, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn dirichlet_examples() {
        assert_eq!(dirichlet_min(0.5, 2).unwrap(), (2, 0.0));
        let (k, v) = dirichlet_min(0.3, 3).unwrap();
        assert_eq!(k, 3);
        assert!((v - 0.1).abs() < 1e-15);
        assert_eq!(dirichlet_min(0.0, 5).unwrap(), (1, 0.0));
        assert!(dirichlet_min(0.1, 0).is_err());
    }

    #[test]
    fn dirichlet_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10_000 {
            let x: f64 = rng.gen_range(-100.0..100.0);
            let m = rng.gen_range(1..=50);
            let (_, v) = dirichlet_min(x, m).unwrap();
            assert!(v <= 1.0 / (m as f64 + 1.0) + 1e-12, "x={x} m={m}");
        }
    }

    #[test]
    fn unweighted_sum_examples() {
        assert_eq!(unweighted_sum_at_half(1).unwrap(), q(1, 2));
        assert_eq!(unweighted_sum_at_half(4).unwrap(), q(1, 1));
        assert_eq!(unweighted_sum_at_half(7).unwrap(), q(2, 1));
        for m in 1..=200 {
            assert_eq!(
                unweighted_sum_at_half(m).unwrap(),
                q(m.div_ceil(2) as i64, 2)
            );
        }
    }

    #[test]
    fn log_comparison() {
        for m in 2..=10_000usize {
            let b = bound(m).unwrap().to_f64();
            assert!(b < std::f64::consts::LN_2 / (m as f64).ln(), "m = {m}");
        }
    }
}
