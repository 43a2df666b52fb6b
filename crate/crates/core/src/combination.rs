use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::Family;
use crate::scalar::{vec_as_text, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombinationError {
    #[error("expected {expected} coefficients, got {got}")]
    Length { expected: usize, got: usize },
    #[error("coefficient {index} is negative ({value})")]
    Negative { index: usize, value: String },
    #[error("empty coefficient vector")]
    Empty,
}

/// Nonnegative weights `b_1..b_m` of a combination `sum_k b_k h(k x)`.
///
/// `coeffs[k - 1]` is the weight of the `k`-th dilation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CoefficientVector<T: Scalar> {
    family: Family,
    m: usize,
    #[serde(with = "vec_as_text")]
    coeffs: Vec<T>,
}

impl<T: Scalar> CoefficientVector<T> {
    pub fn new(family: Family, coeffs: Vec<T>) -> Result<Self, CombinationError> {
        if coeffs.is_empty() {
            return Err(CombinationError::Empty);
        }
        if let Some((i, c)) = coeffs.iter().enumerate().find(|(_, c)| *c < &T::zero()) {
            return Err(CombinationError::Negative {
                index: i + 1,
                value: c.encode(),
            });
        }
        Ok(CoefficientVector {
            family,
            m: coeffs.len(),
            coeffs,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Weight of the `k`-th dilation, 1-based.
    pub fn get(&self, k: usize) -> &T {
        &self.coeffs[k - 1]
    }

    /// `(k, b_k)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> {
        self.coeffs.iter().enumerate().map(|(i, c)| (i + 1, c))
    }

    pub fn sum(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc.add(c))
    }

    /// `sum k b_k`: the slope between sawtooth jumps, and a Lipschitz
    /// constant for a sine combination.
    pub fn weighted_index_sum(&self) -> T {
        self.iter().fold(T::zero(), |acc, (k, c)| {
            acc.add(&c.mul(&T::from_i64(k as i64)))
        })
    }
}

impl<'de, T: Scalar> Deserialize<'de> for CoefficientVector<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar")]
        struct Raw<T: Scalar> {
            family: Family,
            m: usize,
            #[serde(with = "vec_as_text")]
            coeffs: Vec<T>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        if raw.coeffs.len() != raw.m {
            return Err(serde::de::Error::custom(CombinationError::Length {
                expected: raw.m,
                got: raw.coeffs.len(),
            }));
        }
        CoefficientVector::new(raw.family, raw.coeffs).map_err(serde::de::Error::custom)
    }
}
