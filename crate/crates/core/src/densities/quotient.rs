use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::weights::weighted_sum_over_runs;
use super::{DensityError, IndexSet, WeightSeq};
use crate::exactnum::{rational_to_f64, serde_text};

/// `sum_{n in I ∩ [lo, hi)} a_n`.
pub fn weighted_sum(set: &IndexSet, weight: &WeightSeq, lo: u64, hi: u64) -> Rational {
    if hi <= lo {
        return Rational::new();
    }
    if let WeightSeq::Unit = weight {
        return Rational::from(set.count_in(lo, hi));
    }
    let runs = set.runs(lo, hi);
    weighted_sum_over_runs(weight, &runs, lo, hi)
}

/// `Q_a(I, N) = sum_{n in I ∩ [0,N)} a_n / sum_{n < N} a_n`.
pub fn density_quotient(set: &IndexSet, weight: &WeightSeq, n: u64) -> Result<Rational, DensityError> {
    if n == 0 {
        return Err(DensityError::EmptyPrefix);
    }
    let (num, den) = rayon::join(|| weighted_sum(set, weight, 0, n), || weight.prefix_sum(n));
    Ok(num / den)
}

/// Finite-horizon density estimates: exact quotients on a checkpoint grid and
/// their min/max over the tail window `[tail_window_start, horizon]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub horizon: u64,
    pub tail_window_start: u64,
    pub checkpoints: Vec<u64>,
    #[serde(with = "serde_text::vec")]
    pub quotients: Vec<Rational>,
    #[serde(with = "serde_text")]
    pub lower_estimate: Rational,
    #[serde(with = "serde_text")]
    pub upper_estimate: Rational,
    /// Always true: nothing here is a limit.
    pub finite_horizon: bool,
}

/// Checkpoint grid options.
#[derive(Clone, Debug, PartialEq)]
pub struct GridOptions {
    /// Consecutive geometric checkpoints satisfy `N' = max(N + 1, ceil(N * ratio))`.
    pub ratio: Rational,
    /// Block boundaries of the set and weight inside the tail window are added
    /// when there are at most this many of them.
    pub max_structural: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { ratio: Rational::from((5, 4)), max_structural: 4096 }
    }
}

impl DensityReport {
    /// Columns `N, Q_numerator, Q_denominator, Q_float_display`.
    pub fn to_csv(&self) -> Result<String, DensityError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| DensityError::Io(e.to_string());
        w.write_record(["N", "Q_numerator", "Q_denominator", "Q_float_display"]).map_err(io)?;
        for (n, q) in self.checkpoints.iter().zip(&self.quotients) {
            w.write_record([
                n.to_string(),
                q.numer().to_string(),
                q.denom().to_string(),
                format!("{:.12}", rational_to_f64(q)),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| DensityError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| DensityError::Io(e.to_string()))
    }

    pub fn summary(&self) -> String {
        format!(
            "horizon={} tail_start={} lower~{:.6} upper~{:.6}",
            self.horizon,
            self.tail_window_start,
            rational_to_f64(&self.lower_estimate),
            rational_to_f64(&self.upper_estimate)
        )
    }
}

/// Geometric grid `1, 2, 3, 4, 5, 7, ...` up to and including `horizon`.
pub fn geometric_grid(horizon: u64, ratio: &Rational) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n: u64 = 1;
    while n < horizon {
        out.push(n);
        let scaled = Rational::from(ratio * Integer::from(n));
        let next = scaled.ceil().numer().to_u64().unwrap_or(u64::MAX);
        n = next.max(n + 1);
    }
    out.push(horizon);
    out
}

/// `ceil(fraction * horizon)`, at least 1.
pub fn tail_start(horizon: u64, tail_fraction: &Rational) -> u64 {
    let scaled = Rational::from(tail_fraction * Integer::from(horizon));
    scaled.ceil().numer().to_u64().unwrap_or(horizon).clamp(1, horizon)
}

pub fn estimate_densities(
    set: &IndexSet,
    weight: &WeightSeq,
    horizon: u64,
    tail_fraction: &Rational,
) -> Result<DensityReport, DensityError> {
    estimate_densities_with(set, weight, horizon, tail_fraction, &GridOptions::default())
}

pub fn estimate_densities_with(
    set: &IndexSet,
    weight: &WeightSeq,
    horizon: u64,
    tail_fraction: &Rational,
    grid: &GridOptions,
) -> Result<DensityReport, DensityError> {
    if horizon < 10 {
        return Err(DensityError::InvalidArgument("horizon must be at least 10".into()));
    }
    if *tail_fraction <= 0 || *tail_fraction >= 1 {
        return Err(DensityError::InvalidArgument("tail_fraction must lie in (0, 1)".into()));
    }
    if grid.ratio <= 1 {
        return Err(DensityError::InvalidArgument("grid ratio must exceed 1".into()));
    }
    let start = tail_start(horizon, tail_fraction);
    let mut checkpoints = geometric_grid(horizon, &grid.ratio);
    let mut structural = set.boundaries(start.saturating_sub(1), horizon);
    structural.extend(weight.breakpoints_in(start.saturating_sub(1), horizon));
    if structural.len() <= grid.max_structural {
        checkpoints.extend(structural.into_iter().filter(|&p| p >= start));
    }
    checkpoints.push(start);
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let quotients = quotients_at(set, weight, &checkpoints);
    let tail: Vec<&Rational> = checkpoints
        .iter()
        .zip(&quotients)
        .filter(|(n, _)| **n >= start)
        .map(|(_, q)| q)
        .collect();
    let lower = tail.iter().min().map(|q| (*q).clone()).expect("tail window holds the horizon");
    let upper = tail.iter().max().map(|q| (*q).clone()).expect("tail window holds the horizon");
    Ok(DensityReport {
        horizon,
        tail_window_start: start,
        checkpoints,
        quotients,
        lower_estimate: lower,
        upper_estimate: upper,
        finite_horizon: true,
    })
}

/// Exact quotients at sorted checkpoints (all >= 1). Segment sums between
/// consecutive checkpoints are computed in parallel, then accumulated in order.
pub fn quotients_at(set: &IndexSet, weight: &WeightSeq, checkpoints: &[u64]) -> Vec<Rational> {
    let bounds: Vec<(u64, u64)> = checkpoints
        .iter()
        .scan(0u64, |prev, &n| {
            let seg = (*prev, n);
            *prev = n;
            Some(seg)
        })
        .collect();
    let segs: Vec<(Rational, Rational)> = bounds
        .par_iter()
        .map(|&(lo, hi)| (weighted_sum(set, weight, lo, hi), weight.range_sum(lo, hi)))
        .collect();
    let mut num = Rational::new();
    let mut den = Rational::new();
    let mut out = Vec::with_capacity(segs.len());
    for (sn, sd) in segs {
        num += sn;
        den += sd;
        out.push(Rational::from(&num / &den));
    }
    out
}
