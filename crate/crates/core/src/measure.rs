//! Finite atomic probability measures and the function-family tag.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{as_text, Scalar};

/// Which dilated function a combination or measure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Sine,
    Sawtooth,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Sine => "sine",
            Family::Sawtooth => "sawtooth",
        })
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sine" => Ok(Family::Sine),
            "sawtooth" => Ok(Family::Sawtooth),
            other => Err(format!("unknown family {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("measure has no atoms")]
    Empty,
    #[error("negative mass {0}")]
    NegativeMass(String),
    #[error("masses sum to {0}, not 1")]
    NotNormalized(String),
    #[error("duplicate atom location {0}")]
    DuplicateLocation(String),
}

/// Tolerance on the total mass of a floating-point measure.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Atom<T: Scalar> {
    #[serde(with = "as_text")]
    pub x: T,
    #[serde(with = "as_text")]
    pub mass: T,
}

/// A probability measure with finitely many atoms.
///
/// Masses are nonnegative and sum to one (exactly for rationals, within
/// [`MASS_TOLERANCE`] for doubles); locations are pairwise distinct.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct AtomicMeasure<T: Scalar> {
    atoms: Vec<Atom<T>>,
}

impl<T: Scalar> AtomicMeasure<T> {
    pub fn new(atoms: Vec<Atom<T>>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::Empty);
        }
        let mut total = T::zero();
        for atom in &atoms {
            if atom.mass < T::zero() {
                return Err(MeasureError::NegativeMass(atom.mass.encode()));
            }
            total = total.add(&atom.mass);
        }
        if !total.close_to(&T::one(), MASS_TOLERANCE) {
            return Err(MeasureError::NotNormalized(total.encode()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|b| b.x == a.x) {
                return Err(MeasureError::DuplicateLocation(a.x.encode()));
            }
        }
        Ok(AtomicMeasure { atoms })
    }

    pub fn dirac(x: T) -> Self {
        AtomicMeasure {
            atoms: vec![Atom { x, mass: T::one() }],
        }
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn locations(&self) -> impl Iterator<Item = &T> {
        self.atoms.iter().map(|a| &a.x)
    }

    /// `sum mass * h(x)` over the atoms.
    pub fn integrate(&self, mut h: impl FnMut(&T) -> T) -> T {
        self.atoms
            .iter()
            .fold(T::zero(), |acc, a| acc.add(&a.mass.mul(&h(&a.x))))
    }
}

impl<'de, T: Scalar> Deserialize<'de> for AtomicMeasure<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar")]
        struct Raw<T: Scalar> {
            atoms: Vec<Atom<T>>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        AtomicMeasure::new(raw.atoms).map_err(serde::de::Error::custom)
    }
}
