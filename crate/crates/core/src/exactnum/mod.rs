//! Exact arithmetic substrate.
//!
//! Three number shapes are used across the crate:
//!
//! - [`ExactScalar`]: canonical arbitrary-precision rationals (GMP backed).
//! - [`Dyadic`]: `mantissa * 2^exponent` with an odd (or zero) mantissa. Every
//!   coefficient produced by the operator on basis vectors lives here.
//! - [`PowerOfTwo`]: a bare exponent with arbitrary precision, used for
//!   quantities such as `2^(k*delta + 2n + 1 - tau)` that cannot be materialized.
//!
//! Nothing in the crate rounds. Floats only appear as display columns.

mod dyadic;
mod pow2;
mod rational;
mod scalar;
pub mod serde_text;

pub use dyadic::Dyadic;
pub use pow2::{ExponentCap, PowerOfTwo, DEFAULT_EXPONENT_CAP, EXPONENT_CAP_ENV};
pub use rational::{balanced_sum, format_rational, parse_rational, rational_to_f64, ratio};
pub use scalar::Scalar;

pub use rug::{Integer, Rational};

/// Signed canonical rational; `gcd(|num|, den) = 1`, `den >= 1`.
pub type ExactScalar = Rational;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("cannot parse number from {0:?}")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("value {0} is not dyadic (denominator is not a power of two)")]
    NotDyadic(String),
    #[error("exponent {exponent} exceeds the materialization bound {cap}")]
    ExponentTooLarge { exponent: String, cap: u64 },
}
