use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use rug::{Integer, Rational};

use super::NumError;

/// `mantissa * 2^exponent` with the mantissa odd, or the canonical zero `(0, 0)`.
///
/// The exponent is a machine word. Exponents that would not fit are never
/// produced: large powers of two stay in [`super::PowerOfTwo`] and are only
/// materialized below the configured cap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: Integer,
    exponent: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mantissa: Integer::new(), exponent: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mantissa: Integer::from(1), exponent: 0 }
    }

    /// `2^exponent`.
    pub fn pow2(exponent: i64) -> Self {
        Dyadic { mantissa: Integer::from(1), exponent }
    }

    pub fn new(mantissa: impl Into<Integer>, exponent: i64) -> Self {
        let mut d = Dyadic { mantissa: mantissa.into(), exponent };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mantissa == 0 {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.find_one(0).expect("nonzero mantissa has a set bit");
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent = self
                .exponent
                .checked_add(i64::from(tz))
                .expect("dyadic exponent overflow");
        }
    }

    /// Re-runs canonicalization; a no-op on values built through the public API.
    pub fn normalized(&self) -> Self {
        let mut d = self.clone();
        d.normalize();
        d
    }

    pub fn mantissa(&self) -> &Integer {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn abs(&self) -> Self {
        Dyadic { mantissa: self.mantissa.clone().abs(), exponent: self.exponent }
    }

    /// Multiplies by `2^e`.
    pub fn scale_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent.checked_add(e).expect("dyadic exponent overflow"),
        }
    }

    pub fn to_rational(&self) -> Rational {
        let r = Rational::from(&self.mantissa);
        shift_rational(r, self.exponent)
    }

    pub fn try_from_rational(r: &Rational) -> Result<Self, NumError> {
        let den = r.denom();
        if !den.is_power_of_two() {
            return Err(NumError::NotDyadic(super::format_rational(r)));
        }
        let tz = den.find_one(0).unwrap_or(0);
        Ok(Dyadic::new(r.numer().clone(), -i64::from(tz)))
    }

    /// Exact product.
    pub fn mul_ref(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        // odd * odd is odd: already canonical
        Dyadic {
            mantissa: Integer::from(&self.mantissa * &other.mantissa),
            exponent: self
                .exponent
                .checked_add(other.exponent)
                .expect("dyadic exponent overflow"),
        }
    }

    pub fn add_ref(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(other.exponent);
        let a = Integer::from(&self.mantissa << shift_amount(self.exponent - e));
        let b = Integer::from(&other.mantissa << shift_amount(other.exponent - e));
        Dyadic::new(a + b, e)
    }
}

fn shift_amount(d: i64) -> u32 {
    u32::try_from(d).expect("dyadic alignment shift too large")
}

fn shift_rational(mut r: Rational, e: i64) -> Rational {
    if e >= 0 {
        r <<= shift_amount(e);
    } else {
        r >>= shift_amount(-e);
    }
    r
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        self.add_ref(&rhs)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self.add_ref(&-rhs)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        self.mul_ref(&rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.mantissa.cmp0();
        let sb = other.mantissa.cmp0();
        if sa != sb || sa == Ordering::Equal {
            return sa.cmp(&sb);
        }
        let e = self.exponent.min(other.exponent);
        let a = Integer::from(&self.mantissa << shift_amount(self.exponent - e));
        let b = Integer::from(&other.mantissa << shift_amount(other.exponent - e));
        a.cmp(&b)
    }
}

/// `m*2^e`
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl FromStr for Dyadic {
    type Err = NumError;
    fn from_str(s: &str) -> Result<Self, NumError> {
        let t = s.trim();
        let (m, e) = t.split_once("*2^").ok_or_else(|| NumError::Parse(s.to_string()))?;
        let m: Integer = m.trim().parse().map_err(|_| NumError::Parse(s.to_string()))?;
        let e: i64 = e.trim().parse().map_err(|_| NumError::Parse(s.to_string()))?;
        Ok(Dyadic::new(m, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn product_examples() {
        assert_eq!(Dyadic::new(1, 1) * Dyadic::new(1, -3), Dyadic::new(1, -2));
        assert_eq!(Dyadic::new(3, 0) * Dyadic::new(0, 0), Dyadic::zero());
        assert_eq!(Dyadic::new(5, 2) * Dyadic::new(3, -2), Dyadic::new(15, 0));
    }

    #[test]
    fn canonical_form() {
        let d = Dyadic::new(12, 0);
        assert_eq!(d.mantissa(), &3);
        assert_eq!(d.exponent(), 2);
        let z = Dyadic::new(0, 17);
        assert_eq!(z.exponent(), 0);
        assert_eq!(z, Dyadic::zero());
    }

    #[test]
    fn text_round_trip() {
        let d = Dyadic::new(-7, -40);
        assert_eq!(d.to_string(), "-7*2^-40");
        assert_eq!("-7*2^-40".parse::<Dyadic>().unwrap(), d);
        assert_eq!("12*2^0".parse::<Dyadic>().unwrap(), Dyadic::new(3, 2));
        assert!("12".parse::<Dyadic>().is_err());
    }

    #[test]
    fn rejects_non_dyadic_rationals() {
        assert!(Dyadic::try_from_rational(&Rational::from((1, 3))).is_err());
        let d = Dyadic::try_from_rational(&Rational::from((-5, 8))).unwrap();
        assert_eq!(d, Dyadic::new(-5, -3));
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (-10_000i64..10_000, -60i64..60).prop_map(|(m, e)| Dyadic::new(m, e))
    }

    proptest! {
        #[test]
        fn arithmetic_agrees_with_rationals(x in arb_dyadic(), y in arb_dyadic()) {
            let (rx, ry) = (x.to_rational(), y.to_rational());
            prop_assert_eq!((x.clone() + y.clone()).to_rational(), Rational::from(&rx + &ry));
            prop_assert_eq!((x.clone() - y.clone()).to_rational(), Rational::from(&rx - &ry));
            prop_assert_eq!((x.clone() * y.clone()).to_rational(), Rational::from(&rx * &ry));
            prop_assert_eq!(x.cmp(&y), rx.cmp(&ry));
            prop_assert_eq!(x.scale_pow2(-7).to_rational(), Rational::from(&rx >> 7u32));
        }

        #[test]
        fn normalization_is_idempotent(m in any::<i32>(), e in -100i64..100) {
            let d = Dyadic::new(m, e);
            prop_assert_eq!(d.normalized(), d.clone());
            prop_assert_eq!(d.normalized().normalized(), d.normalized());
            prop_assert!(d.is_zero() || d.mantissa().is_odd());
        }
    }
}
