use std::fmt;
use std::ops::Mul;

use rug::Integer;
use serde::{Deserialize, Serialize};

use super::{Dyadic, NumError};

pub const DEFAULT_EXPONENT_CAP: u64 = 1_000_000;
pub const EXPONENT_CAP_ENV: &str = "HYPODENSE_EXPONENT_CAP";

/// Largest `|e|` allowed when a [`PowerOfTwo`] (or any schedule exponent) is
/// turned into a concrete [`Dyadic`] or machine integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentCap(pub u64);

impl Default for ExponentCap {
    fn default() -> Self {
        ExponentCap(DEFAULT_EXPONENT_CAP)
    }
}

impl ExponentCap {
    /// Reads `HYPODENSE_EXPONENT_CAP`, falling back to the default when unset
    /// or unparsable.
    pub fn from_env() -> Self {
        std::env::var(EXPONENT_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(ExponentCap)
            .unwrap_or_default()
    }

    pub fn check(&self, e: &Integer) -> Result<i64, NumError> {
        let too_large = || NumError::ExponentTooLarge { exponent: e.to_string(), cap: self.0 };
        let v = e.to_i64().ok_or_else(too_large)?;
        if v.unsigned_abs() > self.0 {
            return Err(too_large());
        }
        Ok(v)
    }
}

/// `2^exponent`, never materialized unless asked.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowerOfTwo {
    exponent: Integer,
}

impl PowerOfTwo {
    pub fn new(exponent: impl Into<Integer>) -> Self {
        PowerOfTwo { exponent: exponent.into() }
    }

    pub fn one() -> Self {
        PowerOfTwo { exponent: Integer::new() }
    }

    pub fn exponent(&self) -> &Integer {
        &self.exponent
    }

    pub fn square(&self) -> Self {
        PowerOfTwo { exponent: Integer::from(&self.exponent * 2) }
    }

    pub fn recip(&self) -> Self {
        PowerOfTwo { exponent: Integer::from(-&self.exponent) }
    }

    /// `self <= other`, decided on exponents.
    pub fn leq(&self, other: &PowerOfTwo) -> bool {
        self.exponent <= other.exponent
    }

    pub fn min<'a>(&'a self, other: &'a PowerOfTwo) -> &'a PowerOfTwo {
        if self.leq(other) {
            self
        } else {
            other
        }
    }

    pub fn to_dyadic(&self, cap: ExponentCap) -> Result<Dyadic, NumError> {
        Ok(Dyadic::pow2(cap.check(&self.exponent)?))
    }
}

impl Mul for &PowerOfTwo {
    type Output = PowerOfTwo;
    fn mul(self, rhs: &PowerOfTwo) -> PowerOfTwo {
        PowerOfTwo { exponent: Integer::from(&self.exponent + &rhs.exponent) }
    }
}

impl Mul for PowerOfTwo {
    type Output = PowerOfTwo;
    fn mul(self, rhs: PowerOfTwo) -> PowerOfTwo {
        &self * &rhs
    }
}

impl fmt::Display for PowerOfTwo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^{}", self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leq_examples() {
        assert!(PowerOfTwo::new(-35).leq(&PowerOfTwo::new(-16)));
        assert!(!PowerOfTwo::new(-35).leq(&PowerOfTwo::new(-20).square()));
        assert!(PowerOfTwo::new(0).leq(&PowerOfTwo::new(0)));
    }

    #[test]
    fn products_add_exponents() {
        let p = &PowerOfTwo::new(7) * &PowerOfTwo::new(-10);
        assert_eq!(p, PowerOfTwo::new(-3));
        assert_eq!(p.recip(), PowerOfTwo::new(3));
        assert_eq!(p.to_string(), "2^-3");
    }

    #[test]
    fn materialization_respects_cap() {
        let cap = ExponentCap(100);
        assert_eq!(PowerOfTwo::new(-100).to_dyadic(cap).unwrap(), Dyadic::pow2(-100));
        assert!(PowerOfTwo::new(101).to_dyadic(cap).is_err());
        let huge: Integer = Integer::from(1) << 200u32;
        assert!(PowerOfTwo::new(huge).to_dyadic(ExponentCap::default()).is_err());
    }
}
