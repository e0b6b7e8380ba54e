use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::DensityError;
use crate::exactnum::{balanced_sum, serde_text};

/// How a [`WeightSeq::BlockConstant`] continues past its last breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockTail {
    /// Each further block is twice as long as the previous one.
    Doubling,
    /// The last block length repeats forever.
    Repeat,
}

/// A positive weight sequence `a = (a_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSeq {
    /// `a_n = 1`.
    Unit,
    /// `a_n = 1/(n+1)`.
    Harmonic,
    /// `a_n = 1/(n_{k+1} - n_k)` on `[n_k, n_{k+1})`; `breakpoints` starts at 0.
    BlockConstant { breakpoints: Vec<u64>, tail: BlockTail },
    /// Explicit `a_0, ..., a_{L-1}`, then `tail` evaluated at the same index.
    Table {
        #[serde(with = "serde_text::vec")]
        values: Vec<Rational>,
        tail: Box<WeightSeq>,
    },
}

/// Structural evidence for membership in the family of non-increasing,
/// null, non-summable weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCertificate {
    pub non_increasing: bool,
    pub tends_to_zero: bool,
    pub divergent: bool,
}

impl FamilyCertificate {
    pub fn in_family(&self) -> bool {
        self.non_increasing && self.tends_to_zero && self.divergent
    }
}

/// A maximal stretch of indices on which the weight has one closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum PieceKind {
    Constant(Rational),
    /// `a_n = 1/(n+1)`.
    Harmonic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub start: u64,
    pub end: u64,
    pub kind: PieceKind,
}

impl WeightSeq {
    pub fn block_constant(breakpoints: Vec<u64>, tail: BlockTail) -> Result<Self, DensityError> {
        let w = WeightSeq::BlockConstant { breakpoints, tail };
        w.validate()?;
        Ok(w)
    }

    pub fn table(values: Vec<Rational>, tail: WeightSeq) -> Result<Self, DensityError> {
        let w = WeightSeq::Table { values, tail: Box::new(tail) };
        w.validate()?;
        Ok(w)
    }

    /// Preset name (`unit`, `harmonic`) or inline JSON.
    pub fn from_spec(spec: &str) -> Result<Self, DensityError> {
        match spec.trim() {
            "unit" => Ok(WeightSeq::Unit),
            "harmonic" => Ok(WeightSeq::Harmonic),
            other => Self::from_json(other),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DensityError> {
        let w: WeightSeq =
            serde_json::from_str(text).map_err(|e| DensityError::InvalidWeight(e.to_string()))?;
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        let bad = |m: &str| Err(DensityError::InvalidWeight(m.to_string()));
        match self {
            WeightSeq::Unit | WeightSeq::Harmonic => Ok(()),
            WeightSeq::BlockConstant { breakpoints, .. } => {
                if breakpoints.len() < 2 || breakpoints[0] != 0 {
                    return bad("breakpoints must start at 0 and define at least one block");
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("breakpoints must be strictly increasing");
                }
                Ok(())
            }
            WeightSeq::Table { values, tail } => {
                if values.iter().any(|v| *v <= 0) {
                    return bad("table values must be strictly positive");
                }
                tail.validate()
            }
        }
    }

    pub fn certificate(&self) -> FamilyCertificate {
        match self {
            WeightSeq::Unit => {
                FamilyCertificate { non_increasing: true, tends_to_zero: false, divergent: true }
            }
            WeightSeq::Harmonic => {
                FamilyCertificate { non_increasing: true, tends_to_zero: true, divergent: true }
            }
            WeightSeq::BlockConstant { breakpoints, tail } => {
                // every block sums to 1, so the series always diverges
                let lengths_non_decreasing =
                    breakpoints.windows(3).all(|w| w[2] - w[1] >= w[1] - w[0]);
                FamilyCertificate {
                    non_increasing: lengths_non_decreasing,
                    tends_to_zero: *tail == BlockTail::Doubling,
                    divergent: true,
                }
            }
            WeightSeq::Table { values, tail } => {
                let inner = tail.certificate();
                let len = values.len() as u64;
                let prefix_ok = values.windows(2).all(|w| w[0] >= w[1])
                    && values.last().is_none_or(|last| *last >= tail.value(len));
                FamilyCertificate {
                    non_increasing: prefix_ok && inner.non_increasing,
                    tends_to_zero: inner.tends_to_zero,
                    divergent: inner.divergent,
                }
            }
        }
    }

    pub fn in_family(&self) -> bool {
        self.certificate().in_family()
    }

    pub fn value(&self, n: u64) -> Rational {
        match self {
            WeightSeq::Unit => Rational::from(1),
            WeightSeq::Harmonic => Rational::from((1, Integer::from(n) + 1)),
            WeightSeq::BlockConstant { breakpoints, tail } => {
                let (l, r) = block_containing(breakpoints, *tail, n);
                Rational::from((1, r - l))
            }
            WeightSeq::Table { values, tail } => match values.get(n as usize) {
                Some(v) => v.clone(),
                None => tail.value(n),
            },
        }
    }

    /// Closed-form pieces covering `[lo, hi)` in order. Adjacent constant
    /// pieces with equal values are merged.
    pub fn pieces(&self, lo: u64, hi: u64) -> Vec<Piece> {
        let mut out: Vec<Piece> = Vec::new();
        if hi <= lo {
            return out;
        }
        let mut push = |p: Piece| {
            if let (Some(last), PieceKind::Constant(v)) = (out.last_mut(), &p.kind) {
                if last.end == p.start && last.kind == PieceKind::Constant(v.clone()) {
                    last.end = p.end;
                    return;
                }
            }
            out.push(p);
        };
        match self {
            WeightSeq::Unit => push(Piece { start: lo, end: hi, kind: PieceKind::Constant(Rational::from(1)) }),
            WeightSeq::Harmonic => push(Piece { start: lo, end: hi, kind: PieceKind::Harmonic }),
            WeightSeq::BlockConstant { breakpoints, tail } => {
                let mut pos = lo;
                while pos < hi {
                    let (l, r) = block_containing(breakpoints, *tail, pos);
                    let end = r.min(hi);
                    push(Piece { start: pos, end, kind: PieceKind::Constant(Rational::from((1, r - l))) });
                    pos = end;
                }
            }
            WeightSeq::Table { values, tail } => {
                let len = values.len() as u64;
                for n in lo..hi.min(len) {
                    push(Piece { start: n, end: n + 1, kind: PieceKind::Constant(values[n as usize].clone()) });
                }
                if hi > len {
                    for p in tail.pieces(lo.max(len), hi) {
                        push(p);
                    }
                }
            }
        }
        out
    }

    /// `sum_{lo <= n < hi} a_n`.
    pub fn range_sum(&self, lo: u64, hi: u64) -> Rational {
        let parts: Vec<Rational> = self
            .pieces(lo, hi)
            .into_iter()
            .map(|p| match p.kind {
                PieceKind::Constant(v) => v * Integer::from(p.end - p.start),
                PieceKind::Harmonic => harmonic_range(p.start, p.end),
            })
            .collect();
        balanced_sum(parts)
    }

    /// `sum_{n < N} a_n`.
    pub fn prefix_sum(&self, n: u64) -> Rational {
        self.range_sum(0, n)
    }

    /// Block-constant breakpoints inside `(lo, hi]`; empty for other shapes.
    pub fn breakpoints_in(&self, lo: u64, hi: u64) -> Vec<u64> {
        match self {
            WeightSeq::BlockConstant { breakpoints, tail } => {
                let mut out = Vec::new();
                let mut pos = lo;
                while pos < hi {
                    let (_, r) = block_containing(breakpoints, *tail, pos);
                    if r <= hi {
                        out.push(r);
                    }
                    pos = r;
                }
                out
            }
            WeightSeq::Table { values, tail } => tail.breakpoints_in(lo.max(values.len() as u64), hi),
            WeightSeq::Unit | WeightSeq::Harmonic => Vec::new(),
        }
    }
}

/// Block `[l, r)` of a block-constant weight containing `n`.
pub(crate) fn block_containing(breakpoints: &[u64], tail: BlockTail, n: u64) -> (u64, u64) {
    let last = *breakpoints.last().expect("validated breakpoints");
    if n < last {
        let i = breakpoints.partition_point(|&b| b <= n);
        return (breakpoints[i - 1], breakpoints[i]);
    }
    let k = breakpoints.len();
    let mut len = breakpoints[k - 1] - breakpoints[k - 2];
    let mut start = last;
    match tail {
        BlockTail::Repeat => {
            let idx = (n - start) / len;
            start += idx * len;
            (start, start + len)
        }
        BlockTail::Doubling => loop {
            len = len.checked_mul(2).expect("block length overflow");
            let end = start.checked_add(len).expect("block end overflow");
            if n < end {
                return (start, end);
            }
            start = end;
        },
    }
}

const HARMONIC_PAR_CUTOFF: u64 = 1 << 14;
const HARMONIC_LEAF: u64 = 64;

/// `sum_{n=lo}^{hi-1} 1/(n+1)`, exact, by parallel binary splitting.
pub fn harmonic_range(lo: u64, hi: u64) -> Rational {
    if hi <= lo {
        return Rational::new();
    }
    let len = hi - lo;
    if len <= HARMONIC_LEAF {
        let (p, q) = harmonic_leaf((lo..hi).map(|n| n + 1));
        return Rational::from((p, q));
    }
    let mid = lo + len / 2;
    let (a, b) = if len >= HARMONIC_PAR_CUTOFF {
        rayon::join(|| harmonic_range(lo, mid), || harmonic_range(mid, hi))
    } else {
        (harmonic_range(lo, mid), harmonic_range(mid, hi))
    };
    a + b
}

/// `sum_{n in indices} 1/(n+1)` for an arbitrary index list.
pub fn harmonic_over(indices: &[u64]) -> Rational {
    if indices.is_empty() {
        return Rational::new();
    }
    if indices.len() as u64 <= HARMONIC_LEAF {
        let (p, q) = harmonic_leaf(indices.iter().map(|n| n + 1));
        return Rational::from((p, q));
    }
    let (l, r) = indices.split_at(indices.len() / 2);
    if indices.len() as u64 >= HARMONIC_PAR_CUTOFF {
        let (a, b) = rayon::join(|| harmonic_over(l), || harmonic_over(r));
        a + b
    } else {
        harmonic_over(l) + harmonic_over(r)
    }
}

/// Unreduced `sum 1/d` over a short list of denominators.
fn harmonic_leaf(dens: impl Iterator<Item = u64>) -> (Integer, Integer) {
    let mut p = Integer::new();
    let mut q = Integer::from(1);
    for d in dens {
        // p/q + 1/d = (p*d + q)/(q*d)
        p *= d;
        p += &q;
        q *= d;
    }
    (p, q)
}

/// Forward-only prefix sums `S(m) = sum_{k<m} a_k` for monotone queries.
pub struct PrefixCursor<'a> {
    weight: &'a WeightSeq,
    pos: u64,
    sum: Rational,
}

impl<'a> PrefixCursor<'a> {
    pub fn new(weight: &'a WeightSeq) -> Self {
        PrefixCursor { weight, pos: 0, sum: Rational::new() }
    }

    /// `S(m)`. Panics if `m` is below a previous query.
    pub fn at(&mut self, m: u64) -> &Rational {
        assert!(m >= self.pos, "prefix cursor only moves forward");
        if m > self.pos {
            self.sum += self.weight.range_sum(self.pos, m);
            self.pos = m;
        }
        &self.sum
    }

    pub fn position(&self) -> u64 {
        self.pos
    }
}

/// Sum of `a_n` over the elements of a sorted index list, grouped by piece.
pub(crate) fn weighted_sum_over_runs(weight: &WeightSeq, runs: &[(u64, u64)], lo: u64, hi: u64) -> Rational {
    let pieces = weight.pieces(lo, hi);
    let parts: Vec<Rational> = pieces
        .par_iter()
        .map(|p| {
            let a = runs.partition_point(|&(_, r)| r <= p.start);
            let inside = runs[a..]
                .iter()
                .take_while(|&&(l, _)| l < p.end)
                .map(|&(l, r)| (l.max(p.start), r.min(p.end)));
            match &p.kind {
                PieceKind::Constant(v) => {
                    let count: u64 = inside.map(|(l, r)| r - l).sum();
                    Rational::from(v * Integer::from(count))
                }
                PieceKind::Harmonic => {
                    let clipped: Vec<(u64, u64)> = inside.collect();
                    harmonic_over_runs(&clipped)
                }
            }
        })
        .collect();
    balanced_sum(parts)
}

fn harmonic_over_runs(runs: &[(u64, u64)]) -> Rational {
    // long runs use the range splitter; short ones are flattened into one list
    let mut singles = Vec::new();
    let mut long = Vec::new();
    for &(l, r) in runs {
        if r - l > HARMONIC_LEAF {
            long.push((l, r));
        } else {
            singles.extend(l..r);
        }
    }
    let mut parts: Vec<Rational> = long.par_iter().map(|&(l, r)| harmonic_range(l, r)).collect();
    parts.push(harmonic_over(&singles));
    balanced_sum(parts)
}
