use std::collections::BTreeMap;
use std::fmt;

use rug::Rational;

use crate::exactnum::{Dyadic, Scalar};

/// Finitely supported vector in `l1`, zero coefficients never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SparseVec<S: Scalar> {
    entries: BTreeMap<u64, S>,
}

impl<S: Scalar> SparseVec<S> {
    pub fn new() -> Self {
        SparseVec { entries: BTreeMap::new() }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u64, S)>) -> Self {
        let mut v = SparseVec::new();
        for (j, c) in entries {
            v.add_at(j, &c);
        }
        v
    }

    pub fn get(&self, j: u64) -> S {
        self.entries.get(&j).cloned().unwrap_or_else(S::zero)
    }

    /// Adds `c` to coordinate `j`.
    pub fn add_at(&mut self, j: u64, c: &S) {
        if c.is_zero() {
            return;
        }
        let sum = match self.entries.get(&j) {
            Some(old) => old.add_ref(c),
            None => c.clone(),
        };
        if sum.is_zero() {
            self.entries.remove(&j);
        } else {
            self.entries.insert(j, sum);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &S)> {
        self.entries.iter().map(|(j, c)| (*j, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest index in the support.
    pub fn max_index(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, c) in other.iter() {
            out.add_at(j, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, c) in other.iter() {
            out.add_at(j, &c.neg_ref());
        }
        out
    }

    pub fn scale_pow2(&self, e: i64) -> Self {
        SparseVec { entries: self.entries.iter().map(|(j, c)| (*j, c.scale_pow2(e))).collect() }
    }

    /// Keeps the coordinates in `[lo, hi)`.
    pub fn restrict(&self, lo: u64, hi: u64) -> Self {
        SparseVec { entries: self.entries.range(lo..hi).map(|(j, c)| (*j, c.clone())).collect() }
    }

    /// Exact `l1` norm as a scalar.
    pub fn norm_l1_scalar(&self) -> S {
        self.entries.values().fold(S::zero(), |acc, c| acc.add_ref(&c.abs_ref()))
    }

    /// Exact `l1` norm.
    pub fn norm_l1(&self) -> Rational {
        self.norm_l1_scalar().to_rational()
    }

    pub fn to_rational(&self) -> SparseVec<Rational> {
        SparseVec { entries: self.entries.iter().map(|(j, c)| (*j, c.to_rational())).collect() }
    }
}

impl SparseVec<Dyadic> {
    /// The basis vector `e_j`.
    pub fn basis(j: u64) -> Self {
        SparseVec::from_entries([(j, Dyadic::one())])
    }
}

impl<S: Scalar> fmt::Display for SparseVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (j, c)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{j}: {c}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    #[test]
    fn cancellation_removes_entries() {
        let mut v = SparseVec::basis(3);
        v.add_at(3, &Dyadic::new(-1, 0));
        assert!(v.is_empty());
        assert_eq!(v.norm_l1(), 0);
    }

    #[test]
    fn norm_and_restrict() {
        let v = SparseVec::from_entries([(0, Dyadic::new(3, -2)), (5, Dyadic::new(-1, 1)), (9, Dyadic::one())]);
        assert_eq!(v.norm_l1(), ratio(15, 4));
        assert_eq!(v.restrict(1, 9).norm_l1(), ratio(2, 1));
        assert_eq!(v.max_index(), Some(9));
        assert_eq!(v.sub(&v).len(), 0);
        assert_eq!(v.scale_pow2(2).get(0), Dyadic::new(3, 0));
    }
}
