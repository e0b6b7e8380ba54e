use std::fmt::{Debug, Display};

use rug::Rational;

use super::Dyadic;

/// Coefficient type of a sparse vector. The operator only ever multiplies by
/// powers of two, so this is all the algebra it needs.
pub trait Scalar: Clone + Debug + Display + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn abs_ref(&self) -> Self;
    fn scale_pow2(&self, e: i64) -> Self;
    fn to_rational(&self) -> Rational;

    fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }
}

impl Scalar for Dyadic {
    fn zero() -> Self {
        Dyadic::zero()
    }
    fn is_zero(&self) -> bool {
        Dyadic::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        Dyadic::add_ref(self, other)
    }
    fn neg_ref(&self) -> Self {
        -self.clone()
    }
    fn abs_ref(&self) -> Self {
        self.abs()
    }
    fn scale_pow2(&self, e: i64) -> Self {
        Dyadic::scale_pow2(self, e)
    }
    fn to_rational(&self) -> Rational {
        Dyadic::to_rational(self)
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn add_ref(&self, other: &Self) -> Self {
        Rational::from(self + other)
    }
    fn neg_ref(&self) -> Self {
        Rational::from(-self)
    }
    fn abs_ref(&self) -> Self {
        self.clone().abs()
    }
    fn scale_pow2(&self, e: i64) -> Self {
        let amount = u32::try_from(e.unsigned_abs()).expect("power-of-two scale too large");
        if e >= 0 {
            Rational::from(self << amount)
        } else {
            Rational::from(self >> amount)
        }
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}
