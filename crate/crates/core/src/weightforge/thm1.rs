use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::search::{find_block_end, floor_for};
use super::ForgeError;
use crate::densities::{quotients_at, BlockTail, IndexSet, WeightSeq};
use crate::exactnum::serde_text;

/// Breakpoints `0 = n_0 < n_1 < ...` with strictly increasing block lengths
/// and a certified `I`-density floor on every block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub breakpoints: Vec<u64>,
    /// `floors[k] = (1 - 2^-k) * delta` for block `k`.
    #[serde(with = "serde_text::vec")]
    pub floors: Vec<Rational>,
    /// `counts[k] = |[n_k, n_{k+1}) ∩ I|`.
    pub counts: Vec<u64>,
    pub horizon: u64,
    /// Only blocks below the horizon are certified.
    pub finite_horizon: bool,
}

impl BlockPlan {
    pub fn blocks(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn length(&self, k: usize) -> u64 {
        self.breakpoints[k + 1] - self.breakpoints[k]
    }

    /// Re-derives every certificate: counts, floors and strictly increasing lengths.
    pub fn verify(&self, set: &IndexSet) -> bool {
        let lengths_ok = (1..self.blocks()).all(|k| self.length(k) > self.length(k - 1));
        let starts_ok = self.breakpoints.first() == Some(&0);
        let certs_ok = (0..self.blocks()).all(|k| {
            let (n, r) = (self.breakpoints[k], self.breakpoints[k + 1]);
            let c = set.count_in(n, r);
            c == self.counts[k]
                && Rational::from((Integer::from(c), Integer::from(r - n))) >= self.floors[k]
        });
        starts_ok && lengths_ok && certs_ok
    }

    /// The synthesized weight: `a_n = 1/(n_{k+1} - n_k)` on block `k`, doubling after the plan.
    pub fn weight(&self) -> WeightSeq {
        WeightSeq::BlockConstant { breakpoints: self.breakpoints.clone(), tail: BlockTail::Doubling }
    }
}

/// Greedy block plan for a set whose upper density is (at least) `delta`.
///
/// Block `k` has length at least `max(1, 2 * previous length)` and density at
/// least `(1 - 2^-k) * delta`. Blocks are added while a block of minimal
/// length still fits below the horizon.
pub fn synthesize_weight_thm1(set: &IndexSet, delta: &Rational, horizon: u64) -> Result<(BlockPlan, WeightSeq), ForgeError> {
    if *delta < 0 || *delta > 1 {
        return Err(ForgeError::InvalidArgument("delta must lie in [0, 1]".into()));
    }
    if horizon == 0 {
        return Err(ForgeError::InvalidArgument("horizon must be positive".into()));
    }
    let mut breakpoints = vec![0u64];
    let mut floors = Vec::new();
    let mut counts = Vec::new();
    let mut prev_len = 0u64;
    for k in 0u32.. {
        let n = *breakpoints.last().unwrap();
        let min_len = (2 * prev_len).max(1);
        if n.saturating_add(min_len) > horizon {
            break;
        }
        let floor = floor_for(delta, k);
        let r = find_block_end(set, n, min_len, horizon, &floor).ok_or(ForgeError::HorizonExhausted { k })?;
        counts.push(set.count_in(n, r));
        floors.push(floor);
        breakpoints.push(r);
        prev_len = r - n;
    }
    let plan = BlockPlan { breakpoints, floors, counts, horizon, finite_horizon: true };
    let weight = plan.weight();
    Ok((plan, weight))
}

/// `delta * ((k - 1) - sum_{j=1}^{k-1} 2^-j) / (k + 1)`: the guaranteed quotient
/// for `N in (n_k, n_{k+1}]`, `k >= 1`.
pub fn thm1_quotient_bound(delta: &Rational, k: u32) -> Rational {
    let mut s = Rational::new();
    for j in 1..k {
        s += Rational::from((1, Integer::from(1) << j));
    }
    let mut b = Rational::from(k as i64 - 1) - s;
    b *= delta;
    b / Rational::from(k + 1)
}

/// Checks the guaranteed quotient at the given `N` (inside the certified plan).
/// Returns the first failing `N`, if any.
pub fn check_thm1_bound(plan: &BlockPlan, set: &IndexSet, delta: &Rational, ns: &[u64]) -> Option<u64> {
    let bp = &plan.breakpoints;
    let last = *bp.last().unwrap();
    let mut ns: Vec<u64> = ns.iter().copied().filter(|&n| n > bp[1.min(bp.len() - 1)] && n <= last).collect();
    ns.sort_unstable();
    ns.dedup();
    let qs = quotients_at(set, &plan.weight(), &ns);
    for (n, q) in ns.iter().zip(qs) {
        // N in (n_k, n_{k+1}]
        let k = bp.partition_point(|&b| b < *n) - 1;
        if q < thm1_quotient_bound(delta, k as u32) {
            return Some(*n);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;
    use proptest::prelude::*;

    #[test]
    fn full_set_doubles() {
        let (plan, w) = synthesize_weight_thm1(&IndexSet::all(), &ratio(1, 1), 100).unwrap();
        assert_eq!(plan.breakpoints, vec![0, 1, 3, 7, 15, 31, 63]);
        assert!(w.in_family());
        assert!(plan.verify(&IndexSet::all()));
    }

    #[test]
    fn quartic_blocks_two_thirds() {
        let set = IndexSet::quartic_blocks();
        let (plan, w) = synthesize_weight_thm1(&set, &ratio(2, 3), 1 << 12).unwrap();
        assert_eq!(plan.breakpoints, vec![0, 2, 8, 32, 128, 512, 2048]);
        assert!(plan.verify(&set));
        assert!(w.in_family());
        let ns: Vec<u64> = (1..=2048).collect();
        assert_eq!(check_thm1_bound(&plan, &set, &ratio(2, 3), &ns), None);
    }

    #[test]
    fn quartic_blocks_full_density_exhausts() {
        let r = synthesize_weight_thm1(&IndexSet::quartic_blocks(), &ratio(1, 1), 1 << 14);
        assert_eq!(r.unwrap_err(), ForgeError::HorizonExhausted { k: 2 });
    }

    #[test]
    fn bound_values() {
        assert_eq!(thm1_quotient_bound(&ratio(1, 1), 1), 0);
        // k = 3: (2 - 3/4)/4 = 5/16
        assert_eq!(thm1_quotient_bound(&ratio(1, 1), 3), ratio(5, 16));
    }

    proptest! {
        #[test]
        fn periodic_plans_certify_and_meet_bound(m in 2u64..7, r in 0u64..7, h in 50u64..3000) {
            let set = IndexSet::periodic(vec![r % m], m).unwrap();
            let delta = ratio(1, m as i64);
            let (plan, w) = synthesize_weight_thm1(&set, &delta, h).unwrap();
            prop_assert!(plan.verify(&set));
            prop_assert!(w.in_family());
            let ns: Vec<u64> = (1..=*plan.breakpoints.last().unwrap()).collect();
            prop_assert_eq!(check_thm1_bound(&plan, &set, &delta, &ns), None);
        }
    }
}
