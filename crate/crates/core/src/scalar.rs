//! Arithmetic shared by the exact (rational) and floating code paths.

use std::cmp::Ordering;
use std::fmt;

use crate::fracparts::Rational;

/// A number type the solver and the measure code can run over.
///
/// Sign tests go through [`Scalar::sign`], which is exact for rationals and
/// uses a small absolute tolerance for doubles.
pub trait Scalar: Clone + PartialOrd + fmt::Debug + Send + Sync + 'static {
    /// Whether arithmetic is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    /// The value of a finite double; `None` for NaN or infinities.
    fn from_f64(x: f64) -> Option<Self>;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Caller guarantees `rhs` is nonzero.
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn sign(&self) -> Ordering;
    fn to_f64(&self) -> f64;
    /// Equality, up to `tol` for inexact types.
    fn close_to(&self, other: &Self, tol: f64) -> bool;
    /// Text form used in JSON and the LP export: `p/q` for rationals, 17
    /// significant digits for doubles.
    fn encode(&self) -> String;
    fn decode(s: &str) -> Option<Self>;

    fn is_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }
    fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }
    fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }
}

/// Absolute tolerance for float sign tests inside the simplex solver.
pub const FLOAT_EPS: f64 = 1e-11;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> Ordering {
        if *self > FLOAT_EPS {
            Ordering::Greater
        } else if *self < -FLOAT_EPS {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
    fn encode(&self) -> String {
        format_f64(*self)
    }
    fn decode(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_i64(n: i64) -> Self {
        Rational::integer(n)
    }
    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_f64(x).ok()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if Rational::is_negative(self) {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn encode(&self) -> String {
        self.to_string()
    }
    fn decode(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

/// Decimal text with 17 significant digits; round-trips every finite double.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serde adapter storing a [`Scalar`] as its text form.
pub mod as_text {
    use super::Scalar;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.encode())
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let s = String::deserialize(d)?;
        T::decode(&s).ok_or_else(|| serde::de::Error::custom(format!("bad number {s:?}")))
    }
}

/// Same as [`as_text`], for vectors.
pub mod vec_as_text {
    use super::Scalar;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.encode())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| {
                T::decode(s).ok_or_else(|| serde::de::Error::custom(format!("bad number {s:?}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_text_has_17_significant_digits() {
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(format_f64(-0.1), "-1.0000000000000001e-1");
    }

    proptest! {
        #[test]
        fn float_text_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(f64::decode(&x.encode()).unwrap(), x);
        }
    }
}
