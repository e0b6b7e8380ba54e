use rug::Rational;
use serde::{Deserialize, Serialize};

use super::ForgeError;
use crate::densities::{PrefixCursor, WeightSeq};

/// Default upper limit for a single `alpha_n` during the scan.
pub const DEFAULT_ALPHA_CAP: u64 = 1 << 24;

/// Non-decreasing `alpha_1, ..., alpha_{n_max}` with
/// `sum_{k=n}^{(1+alpha_n) n - 1} a_k / sum_{k=0}^{(1+alpha_n) n} a_k >= 1/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSequence {
    /// `values[n - 1] = alpha_n`.
    pub values: Vec<u64>,
    pub weight: WeightSeq,
}

/// `2 (S(m) - S(n)) >= S(m + 1)` with `m = (1 + alpha) n` and `S(m) = sum_{k<m} a_k`.
fn holds(s_n: &Rational, s_m: &Rational, s_m1: &Rational) -> bool {
    let diff = Rational::from(s_m - s_n);
    Rational::from(&diff * 2) >= *s_m1
}

/// Evaluates the inequality from scratch.
pub fn alpha_condition(weight: &WeightSeq, n: u64, alpha: u64) -> bool {
    let m = (1 + alpha) * n;
    holds(&weight.prefix_sum(n), &weight.prefix_sum(m), &weight.prefix_sum(m + 1))
}

impl AlphaSequence {
    pub fn alpha(&self, n: u64) -> u64 {
        self.values[(n - 1) as usize]
    }

    pub fn n_max(&self) -> u64 {
        self.values.len() as u64
    }

    /// Non-decreasing, at least 1, and the inequality holds at every stored `n`.
    pub fn verify(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
            && self.values.iter().all(|&a| a >= 1)
            && (1..=self.n_max()).all(|n| alpha_condition(&self.weight, n, self.alpha(n)))
    }

    /// For every `n`, lowering `alpha_n` by one breaks either the inequality,
    /// monotonicity or positivity. Returns the first `n` where it does not.
    pub fn first_non_minimal(&self) -> Option<u64> {
        (1..=self.n_max()).find(|&n| {
            let a = self.alpha(n);
            let prev = if n == 1 { 1 } else { self.alpha(n - 1) };
            a > prev && alpha_condition(&self.weight, n, a - 1)
        })
    }
}

/// Pointwise-minimal scan: `alpha_n` is the least `alpha >= max(1, alpha_{n-1})`
/// satisfying the inequality.
pub fn alpha_sequence(weight: &WeightSeq, n_max: u64, cap: u64) -> Result<AlphaSequence, ForgeError> {
    let mut small = PrefixCursor::new(weight);
    let mut big = PrefixCursor::new(weight);
    let mut values = Vec::with_capacity(n_max as usize);
    let mut alpha = 1u64;
    for n in 1..=n_max {
        let s_n = small.at(n).clone();
        loop {
            if alpha > cap {
                return Err(ForgeError::ScanExhausted { n });
            }
            let m = (1 + alpha) * n;
            let s_m = big.at(m).clone();
            let s_m1 = big.at(m + 1);
            if holds(&s_n, &s_m, s_m1) {
                break;
            }
            alpha += 1;
        }
        values.push(alpha);
    }
    Ok(AlphaSequence { values, weight: weight.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::BlockTail;

    #[test]
    fn constant_prefix_gives_two() {
        let mut bp: Vec<u64> = (0..=64).collect();
        bp.push(128);
        let w = WeightSeq::block_constant(bp, BlockTail::Doubling).unwrap();
        let s = alpha_sequence(&w, 1, DEFAULT_ALPHA_CAP).unwrap();
        assert_eq!(s.values, vec![2]);
    }

    #[test]
    fn harmonic_oracle() {
        // independent exact scan with python fractions
        let s = alpha_sequence(&WeightSeq::Harmonic, 10, DEFAULT_ALPHA_CAP).unwrap();
        assert_eq!(s.values, vec![4, 5, 7, 9, 10, 12, 14, 16, 17, 19]);
        assert!(s.verify());
        assert_eq!(s.first_non_minimal(), None);
    }

    #[test]
    fn long_first_block_gives_two_everywhere() {
        let w = WeightSeq::block_constant(vec![0, 1 << 20], BlockTail::Doubling).unwrap();
        let s = alpha_sequence(&w, 40, DEFAULT_ALPHA_CAP).unwrap();
        assert!(s.values.iter().all(|&a| a == 2));
    }

    #[test]
    fn unit_weight_gives_two() {
        let s = alpha_sequence(&WeightSeq::Unit, 30, DEFAULT_ALPHA_CAP).unwrap();
        assert!(s.values.iter().all(|&a| a == 2));
    }

    #[test]
    fn cap_is_reported() {
        assert_eq!(
            alpha_sequence(&WeightSeq::Harmonic, 10, 3).unwrap_err(),
            ForgeError::ScanExhausted { n: 1 }
        );
    }
}
