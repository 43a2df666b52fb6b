//! Floor/ceiling fractional parts and the sawtooth function, in floating
//! point and in exact rational arithmetic.
//!
//! The float versions operate on the exact binary value of their input: no
//! snapping of values that are merely close to an integer. `x - floor(x)` is
//! exactly representable for every finite double, so these functions round
//! at most once (and usually not at all).

mod rational;

pub use rational::{compare, Rational};

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
}

fn finite(x: f64) -> Result<f64, FracError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(FracError::NonFinite(x))
    }
}

/// `{x} = x - floor(x)`, in `[0, 1)`.
pub fn lower_frac(x: f64) -> Result<f64, FracError> {
    let x = finite(x)?;
    let f = x - x.floor();
    // Only reachable for tiny negative x where x - floor(x) rounds up to 1.
    Ok(if f >= 1.0 { 0.0 } else { f })
}

/// `{x}* = x - ceil(x) + 1`, in `(0, 1]`.
pub fn upper_frac(x: f64) -> Result<f64, FracError> {
    let f = lower_frac(x)?;
    Ok(if f == 0.0 { 1.0 } else { f })
}

/// The sawtooth `g(x) = x + floor(1/2 - x)`, in `(-1/2, 1/2]`.
pub fn sawtooth(x: f64) -> Result<f64, FracError> {
    let f = lower_frac(x)?;
    Ok(if f > 0.5 { f - 1.0 } else { f })
}

pub fn lower_frac_exact(q: &Rational) -> Rational {
    q - &Rational::integer(q.floor())
}

pub fn upper_frac_exact(q: &Rational) -> Rational {
    q - &Rational::integer(q.ceil() - BigInt::from(1))
}

pub fn sawtooth_exact(q: &Rational) -> Rational {
    let half = Rational::frac(1, 2);
    q + &Rational::integer((&half - q).floor())
}

/// Signed residue of `numer` modulo `denom` in `(-denom/2, denom/2]`, i.e.
/// `denom * g(numer/denom)`. `denom` must be positive.
pub fn sawtooth_residue(numer: &BigInt, denom: &BigInt) -> BigInt {
    use num_integer::Integer;
    let r = numer.mod_floor(denom);
    if &r * 2 > *denom {
        r - denom
    } else {
        r
    }
}
