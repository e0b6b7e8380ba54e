use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::search::{find_block_end, floor_for};
use super::ForgeError;
use crate::densities::{quotients_at, BlockTail, IndexSet, WeightSeq};
use crate::exactnum::serde_text;

/// Cyclic partition of block indices: block `l` belongs to part `pattern[l mod len]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionWithBoundedGaps {
    pub pattern: Vec<usize>,
}

impl PartitionWithBoundedGaps {
    /// Every block index in part 0.
    pub fn single() -> Self {
        PartitionWithBoundedGaps { pattern: vec![0] }
    }

    /// Even block indices in part 0, odd ones in part 1.
    pub fn even_odd() -> Self {
        PartitionWithBoundedGaps { pattern: vec![0, 1] }
    }

    pub fn part_of(&self, l: u64) -> usize {
        self.pattern[(l % self.pattern.len() as u64) as usize]
    }

    pub fn parts(&self) -> usize {
        self.pattern.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Smallest `R` with `l_j <= j * R` for the increasing enumeration
    /// `l_1 < l_2 < ...` of the part (block indices start at 0).
    pub fn gap_bound(&self, part: usize) -> Option<u64> {
        let pos: Vec<u64> =
            self.pattern.iter().enumerate().filter(|(_, &p)| p == part).map(|(i, _)| i as u64).collect();
        let first = *pos.first()?;
        let len = self.pattern.len() as u64;
        let mut gap = pos[0] + len - pos[pos.len() - 1];
        for w in pos.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        Some(first.max(gap).max(1))
    }

    pub fn validate(&self, parts: usize) -> Result<(), ForgeError> {
        if self.pattern.is_empty() {
            return Err(ForgeError::InvalidArgument("partition pattern is empty".into()));
        }
        for p in 0..parts {
            if self.gap_bound(p).is_none() {
                return Err(ForgeError::InvalidArgument(format!("part {p} never occurs in the partition")));
            }
        }
        if self.parts() > parts {
            return Err(ForgeError::InvalidArgument("partition names more parts than sets".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiPlan {
    pub breakpoints: Vec<u64>,
    /// Part (set index) served by each block.
    pub parts: Vec<usize>,
    #[serde(with = "serde_text::vec")]
    pub floors: Vec<Rational>,
    pub counts: Vec<u64>,
    /// `R_p` for every part.
    pub gap_bounds: Vec<u64>,
    pub horizon: u64,
    /// Blocks are chosen in increasing block index, each for its own part only.
    pub selection_order: String,
    pub finite_horizon: bool,
}

impl MultiPlan {
    pub fn weight(&self) -> WeightSeq {
        WeightSeq::BlockConstant { breakpoints: self.breakpoints.clone(), tail: BlockTail::Doubling }
    }

    /// Block indices belonging to `part`, increasing.
    pub fn blocks_of(&self, part: usize) -> Vec<u64> {
        self.parts.iter().enumerate().filter(|(_, &p)| p == part).map(|(l, _)| l as u64).collect()
    }
}

/// One block-constant weight giving every set positive lower weighted density.
pub fn synthesize_weight_multi(
    sets: &[IndexSet],
    deltas: &[Rational],
    partition: &PartitionWithBoundedGaps,
    horizon: u64,
) -> Result<MultiPlan, ForgeError> {
    if sets.is_empty() || sets.len() != deltas.len() {
        return Err(ForgeError::InvalidArgument("need one delta per set and at least one set".into()));
    }
    if deltas.iter().any(|d| *d <= 0 || *d > 1) {
        return Err(ForgeError::InvalidArgument("every delta must lie in (0, 1]".into()));
    }
    partition.validate(sets.len())?;
    let mut breakpoints = vec![0u64];
    let (mut parts, mut floors, mut counts) = (Vec::new(), Vec::new(), Vec::new());
    let mut prev_len = 0u64;
    for l in 0u64.. {
        let n = *breakpoints.last().unwrap();
        let min_len = (2 * prev_len).max(1);
        if n.saturating_add(min_len) > horizon {
            break;
        }
        let p = partition.part_of(l);
        let exp = u32::try_from(l).unwrap_or(u32::MAX).min(4096);
        let floor = floor_for(&deltas[p], exp);
        let r = find_block_end(&sets[p], n, min_len, horizon, &floor)
            .ok_or(ForgeError::HorizonExhaustedPart { part: p, block: l })?;
        counts.push(sets[p].count_in(n, r));
        floors.push(floor);
        parts.push(p);
        breakpoints.push(r);
        prev_len = r - n;
    }
    let gap_bounds = (0..sets.len()).map(|p| partition.gap_bound(p).unwrap()).collect();
    Ok(MultiPlan {
        breakpoints,
        parts,
        floors,
        counts,
        gap_bounds,
        horizon,
        selection_order: "greedy by block index".into(),
        finite_horizon: true,
    })
}

/// Checks `Q_a(I_p, N) >= (j - 3) delta_p / l_{j+1}` for `N in (n_{l_j}, n_{l_{j+1}}]`
/// along the part's own blocks (1-based `j`), at every `N` in `ns`.
/// Returns the first failing `(part, N)`.
pub fn check_multi_bound(plan: &MultiPlan, sets: &[IndexSet], deltas: &[Rational], ns: &[u64]) -> Option<(usize, u64)> {
    let weight = plan.weight();
    for (p, set) in sets.iter().enumerate() {
        let ls = plan.blocks_of(p);
        let mut sel: Vec<(u64, Rational)> = Vec::new();
        for j in 1..ls.len() {
            // enumeration is 1-based: l_j = ls[j - 1]
            let lo = plan.breakpoints[ls[j - 1] as usize];
            let hi = plan.breakpoints[ls[j] as usize];
            let mut b = Rational::from((Integer::from(j as i64 - 3), Integer::from(ls[j])));
            b *= &deltas[p];
            for &n in ns.iter().filter(|&&n| n > lo && n <= hi) {
                sel.push((n, b.clone()));
            }
        }
        sel.sort_by_key(|(n, _)| *n);
        let pts: Vec<u64> = sel.iter().map(|(n, _)| *n).collect();
        let qs = quotients_at(set, &weight, &pts);
        for ((n, b), q) in sel.iter().zip(qs) {
            if q < *b {
                return Some((p, *n));
            }
        }
    }
    None
}
