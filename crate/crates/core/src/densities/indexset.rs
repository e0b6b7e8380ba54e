use serde::{Deserialize, Serialize};

use super::DensityError;

/// Interval rule for [`IndexSet::BlockUnion`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlockGenerator {
    /// Finitely many half-open intervals `[l, r)`, disjoint and increasing.
    Explicit { intervals: Vec<(u64, u64)> },
    /// Blocks `[start * base^k, end * base^k)` for `k >= first`.
    Geometric { base: u64, start: u64, end: u64, first: u32 },
}

/// A subset of the naturals with exact membership and prefix counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexSet {
    /// Strictly increasing list.
    Explicit { elements: Vec<u64> },
    /// `{n : n mod modulus in residues}`; residues strictly increasing, below the modulus.
    Periodic { residues: Vec<u64>, modulus: u64 },
    BlockUnion { blocks: BlockGenerator },
    Complement { inner: Box<IndexSet> },
    /// `inner + offset`.
    Shifted { inner: Box<IndexSet>, offset: u64 },
}

/// Periodic sets scan one period for runs; keep that table small.
pub const MAX_MODULUS: u64 = 1 << 20;

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet::Explicit { elements: Vec::new() }
    }

    pub fn all() -> Self {
        IndexSet::Periodic { residues: vec![0], modulus: 1 }
    }

    pub fn evens() -> Self {
        IndexSet::Periodic { residues: vec![0], modulus: 2 }
    }

    pub fn odds() -> Self {
        IndexSet::Periodic { residues: vec![1], modulus: 2 }
    }

    /// Sorts and deduplicates.
    pub fn explicit(mut elements: Vec<u64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        IndexSet::Explicit { elements }
    }

    pub fn periodic(mut residues: Vec<u64>, modulus: u64) -> Result<Self, DensityError> {
        residues.sort_unstable();
        residues.dedup();
        let s = IndexSet::Periodic { residues, modulus };
        s.validate()?;
        Ok(s)
    }

    pub fn intervals(intervals: Vec<(u64, u64)>) -> Result<Self, DensityError> {
        let s = IndexSet::BlockUnion { blocks: BlockGenerator::Explicit { intervals } };
        s.validate()?;
        Ok(s)
    }

    pub fn geometric_blocks(base: u64, start: u64, end: u64, first: u32) -> Result<Self, DensityError> {
        let s = IndexSet::BlockUnion { blocks: BlockGenerator::Geometric { base, start, end, first } };
        s.validate()?;
        Ok(s)
    }

    /// `union_k [4^k, 2*4^k)`.
    pub fn quartic_blocks() -> Self {
        IndexSet::BlockUnion {
            blocks: BlockGenerator::Geometric { base: 4, start: 1, end: 2, first: 0 },
        }
    }

    pub fn complement(self) -> Self {
        IndexSet::Complement { inner: Box::new(self) }
    }

    pub fn shifted(self, offset: u64) -> Self {
        IndexSet::Shifted { inner: Box::new(self), offset }
    }

    /// Preset name (`evens`, `odds`, `all`, `empty`, `quartic_blocks`) or inline JSON.
    pub fn from_spec(spec: &str) -> Result<Self, DensityError> {
        match spec.trim() {
            "evens" => Ok(Self::evens()),
            "odds" => Ok(Self::odds()),
            "all" | "naturals" => Ok(Self::all()),
            "empty" => Ok(Self::empty()),
            "quartic_blocks" => Ok(Self::quartic_blocks()),
            other => Self::from_json(other),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DensityError> {
        let s: IndexSet =
            serde_json::from_str(text).map_err(|e| DensityError::InvalidSet(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        let bad = |m: &str| Err(DensityError::InvalidSet(m.to_string()));
        match self {
            IndexSet::Explicit { elements } => {
                if elements.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("explicit elements must be strictly increasing");
                }
            }
            IndexSet::Periodic { residues, modulus } => {
                if *modulus == 0 || *modulus > MAX_MODULUS {
                    return bad("modulus must lie in [1, 2^20]");
                }
                if residues.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("residues must be strictly increasing");
                }
                if residues.iter().any(|r| r >= modulus) {
                    return bad("residues must be below the modulus");
                }
            }
            IndexSet::BlockUnion { blocks } => match blocks {
                BlockGenerator::Explicit { intervals } => {
                    if intervals.iter().any(|(l, r)| l >= r) {
                        return bad("intervals must be non-empty");
                    }
                    if intervals.windows(2).any(|w| w[0].1 > w[1].0) {
                        return bad("intervals must be disjoint and increasing");
                    }
                }
                BlockGenerator::Geometric { base, start, end, .. } => {
                    if *base < 2 || start >= end {
                        return bad("geometric blocks need base >= 2 and start < end");
                    }
                    if start.checked_mul(*base).is_none_or(|s| *end > s) {
                        return bad("geometric blocks overlap: need end <= start * base");
                    }
                }
            },
            IndexSet::Complement { inner } | IndexSet::Shifted { inner, .. } => inner.validate()?,
        }
        Ok(())
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            IndexSet::Explicit { elements } => elements.binary_search(&n).is_ok(),
            IndexSet::Periodic { residues, modulus } => residues.binary_search(&(n % modulus)).is_ok(),
            IndexSet::BlockUnion { blocks } => {
                block_list(blocks, n.saturating_add(1)).iter().any(|&(l, r)| l <= n && n < r)
            }
            IndexSet::Complement { inner } => !inner.contains(n),
            IndexSet::Shifted { inner, offset } => n >= *offset && inner.contains(n - offset),
        }
    }

    /// `|I ∩ [0, n)|`.
    pub fn count_below(&self, n: u64) -> u64 {
        match self {
            IndexSet::Explicit { elements } => elements.partition_point(|&x| x < n) as u64,
            IndexSet::Periodic { residues, modulus } => {
                let full = n / modulus;
                let rest = n % modulus;
                full * residues.len() as u64 + residues.partition_point(|&r| r < rest) as u64
            }
            IndexSet::BlockUnion { blocks } => {
                block_list(blocks, n).iter().map(|&(l, r)| r.min(n) - l).sum()
            }
            IndexSet::Complement { inner } => n - inner.count_below(n),
            IndexSet::Shifted { inner, offset } => {
                if n <= *offset {
                    0
                } else {
                    inner.count_below(n - offset)
                }
            }
        }
    }

    /// `|I ∩ [lo, hi)|`.
    pub fn count_in(&self, lo: u64, hi: u64) -> u64 {
        if hi <= lo {
            return 0;
        }
        self.count_below(hi) - self.count_below(lo)
    }

    /// Maximal runs of `I ∩ [lo, hi)`, as half-open intervals clipped to the window.
    pub fn runs(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        if hi <= lo {
            return Vec::new();
        }
        match self {
            IndexSet::Explicit { elements } => {
                let from = elements.partition_point(|&x| x < lo);
                let mut out: Vec<(u64, u64)> = Vec::new();
                for &x in elements[from..].iter().take_while(|&&x| x < hi) {
                    match out.last_mut() {
                        Some(last) if last.1 == x => last.1 = x + 1,
                        _ => out.push((x, x + 1)),
                    }
                }
                out
            }
            IndexSet::Periodic { residues, modulus } => {
                let m = *modulus as usize;
                let mut table = vec![false; m];
                for &r in residues {
                    table[r as usize] = true;
                }
                let mut out: Vec<(u64, u64)> = Vec::new();
                let mut n = lo;
                let mut idx = (lo % modulus) as usize;
                while n < hi {
                    if table[idx] {
                        match out.last_mut() {
                            Some(last) if last.1 == n => last.1 = n + 1,
                            _ => out.push((n, n + 1)),
                        }
                    }
                    n += 1;
                    idx += 1;
                    if idx == m {
                        idx = 0;
                    }
                }
                out
            }
            IndexSet::BlockUnion { blocks } => {
                let mut out: Vec<(u64, u64)> = Vec::new();
                for (l, r) in block_list(blocks, hi) {
                    let (l, r) = (l.max(lo), r.min(hi));
                    if l >= r {
                        continue;
                    }
                    match out.last_mut() {
                        Some(last) if last.1 == l => last.1 = r,
                        _ => out.push((l, r)),
                    }
                }
                out
            }
            IndexSet::Complement { inner } => {
                let mut out = Vec::new();
                let mut cur = lo;
                for (l, r) in inner.runs(lo, hi) {
                    if l > cur {
                        out.push((cur, l));
                    }
                    cur = r;
                }
                if cur < hi {
                    out.push((cur, hi));
                }
                out
            }
            IndexSet::Shifted { inner, offset } => {
                if hi <= *offset {
                    return Vec::new();
                }
                let ilo = lo.saturating_sub(*offset);
                inner
                    .runs(ilo, hi - offset)
                    .into_iter()
                    .map(|(l, r)| (l + offset, r + offset))
                    .collect()
            }
        }
    }

    /// Elements of `I ∩ [lo, hi)` in increasing order.
    pub fn elements(&self, lo: u64, hi: u64) -> Vec<u64> {
        self.runs(lo, hi).into_iter().flat_map(|(l, r)| l..r).collect()
    }

    /// Interval endpoints of block structure inside `(lo, hi]`; empty for
    /// sets without block structure. Density extrema of block sets sit here.
    pub fn boundaries(&self, lo: u64, hi: u64) -> Vec<u64> {
        let mut out = match self {
            IndexSet::BlockUnion { blocks } => block_list(blocks, hi.saturating_add(1))
                .into_iter()
                .flat_map(|(l, r)| [l, r])
                .filter(|&p| p > lo && p <= hi)
                .collect(),
            IndexSet::Complement { inner } => inner.boundaries(lo, hi),
            IndexSet::Shifted { inner, offset } => inner
                .boundaries(lo.saturating_sub(*offset), hi.saturating_sub(*offset))
                .into_iter()
                .map(|p| p + offset)
                .filter(|&p| p > lo && p <= hi)
                .collect(),
            _ => Vec::new(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Blocks with left endpoint below `limit`, in increasing order.
fn block_list(blocks: &BlockGenerator, limit: u64) -> Vec<(u64, u64)> {
    match blocks {
        BlockGenerator::Explicit { intervals } => {
            intervals.iter().copied().take_while(|&(l, _)| l < limit).collect()
        }
        BlockGenerator::Geometric { base, start, end, first } => {
            let mut out = Vec::new();
            let Some(mut scale) = base.checked_pow(*first) else {
                return out;
            };
            loop {
                let (Some(l), Some(r)) = (start.checked_mul(scale), end.checked_mul(scale)) else {
                    break;
                };
                if l >= limit {
                    break;
                }
                out.push((l, r));
                match scale.checked_mul(*base) {
                    Some(s) => scale = s,
                    None => break,
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_count(s: &IndexSet, n: u64) -> u64 {
        (0..n).filter(|&k| s.contains(k)).count() as u64
    }

    #[test]
    fn presets() {
        assert_eq!(IndexSet::evens().count_below(11), 6);
        assert_eq!(IndexSet::odds().count_below(11), 5);
        assert_eq!(IndexSet::all().count_below(11), 11);
        assert_eq!(IndexSet::empty().count_below(11), 0);
        let q = IndexSet::quartic_blocks();
        assert_eq!(q.elements(0, 40), vec![1, 4, 5, 6, 7, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31]);
        assert_eq!(q.boundaries(0, 40), vec![1, 2, 4, 8, 16, 32]);
    }

    #[test]
    fn validation() {
        assert!(IndexSet::periodic(vec![3], 3).is_err());
        assert!(IndexSet::intervals(vec![(0, 5), (4, 8)]).is_err());
        assert!(IndexSet::geometric_blocks(2, 1, 3, 0).is_err());
        assert!(IndexSet::from_json(r#"{"kind":"explicit","elements":[3,1]}"#).is_err());
        assert!(IndexSet::from_json(r#"{"kind":"explicit","elements":[1],"extra":0}"#).is_err());
        assert!(IndexSet::from_spec("odds").is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = IndexSet::quartic_blocks().complement().shifted(3);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(IndexSet::from_json(&text).unwrap(), s);
    }

    fn arb_set() -> impl Strategy<Value = IndexSet> {
        let leaf = prop_oneof![
            proptest::collection::vec(0u64..300, 0..40).prop_map(IndexSet::explicit),
            (1u64..12, proptest::collection::vec(0u64..12, 0..6)).prop_map(|(m, r)| {
                IndexSet::periodic(r.into_iter().map(|x| x % m).collect(), m).unwrap()
            }),
            (2u64..5, 1u64..3, 0u32..3).prop_map(|(b, s, f)| {
                IndexSet::geometric_blocks(b, s, s + 1, f).unwrap()
            }),
        ];
        leaf.prop_recursive(2, 8, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(IndexSet::complement),
                (inner, 0u64..7).prop_map(|(s, o)| s.shifted(o)),
            ]
        })
    }

    proptest! {
        #[test]
        fn prefix_count_matches_membership(s in arb_set(), n in 0u64..400) {
            prop_assert_eq!(s.count_below(n), brute_count(&s, n));
            prop_assert!(s.count_below(n) <= n);
            prop_assert!(s.count_below(n) <= s.count_below(n + 1));
        }

        #[test]
        fn runs_partition_the_window(s in arb_set(), lo in 0u64..200, len in 0u64..200) {
            let hi = lo + len;
            let runs = s.runs(lo, hi);
            let listed: Vec<u64> = runs.iter().flat_map(|&(l, r)| l..r).collect();
            let brute: Vec<u64> = (lo..hi).filter(|&k| s.contains(k)).collect();
            prop_assert_eq!(listed, brute);
            prop_assert!(runs.windows(2).all(|w| w[0].1 < w[1].0));
        }
    }
}
