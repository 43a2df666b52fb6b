//! Optimal inequalities `sum_k a_k h(kx) <= 1` for dilations of the sine and
//! sawtooth functions: coefficients, sharp bounds, extremal measures, and
//! independent checks through exact breakpoint analysis and linear
//! programming.

pub mod combination;
pub mod fracparts;
pub mod lp;
pub mod measure;
pub mod sawtooth;
pub mod scalar;
pub mod sine;

pub use combination::CoefficientVector;
pub use fracparts::Rational;
pub use measure::{Atom, AtomicMeasure, Family};
