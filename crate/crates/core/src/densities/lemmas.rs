use rug::Rational;
use serde::{Deserialize, Serialize};

use super::quotient::{estimate_densities, weighted_sum};
use super::weights::PieceKind;
use super::{DensityError, IndexSet, WeightSeq};
use crate::exactnum::serde_text;

/// `Q_a(I, N) + Q_a(N \ I, N) == 1`, exactly.
pub fn duality_check(set: &IndexSet, weight: &WeightSeq, n: u64) -> Result<bool, DensityError> {
    if n == 0 {
        return Err(DensityError::EmptyPrefix);
    }
    let comp = set.clone().complement();
    let (inside, outside) =
        rayon::join(|| weighted_sum(set, weight, 0, n), || weighted_sum(&comp, weight, 0, n));
    let total = weight.prefix_sum(n);
    Ok(inside / &total + outside / &total == 1)
}

/// Lower and upper estimates under two weights, ordered as
/// `(lower_b, lower_a, upper_a, upper_b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneChain {
    #[serde(with = "serde_text")]
    pub lower_b: Rational,
    #[serde(with = "serde_text")]
    pub lower_a: Rational,
    #[serde(with = "serde_text")]
    pub upper_a: Rational,
    #[serde(with = "serde_text")]
    pub upper_b: Rational,
}

impl MonotoneChain {
    /// `lower_b <= lower_a + tol` and `upper_a <= upper_b + tol`.
    pub fn holds(&self, tol: &Rational) -> bool {
        self.lower_b <= Rational::from(&self.lower_a + tol)
            && self.upper_a <= Rational::from(&self.upper_b + tol)
    }
}

/// Estimates both weights on `I`. Only pairs whose ratio `a_n / b_n` is
/// certified non-increasing and null are accepted: `b` must be `Unit` and `a`
/// must carry a family certificate.
pub fn monotonicity_check(
    set: &IndexSet,
    a: &WeightSeq,
    b: &WeightSeq,
    horizon: u64,
    tail_fraction: &Rational,
) -> Result<MonotoneChain, DensityError> {
    if *b != WeightSeq::Unit || !a.in_family() {
        return Err(DensityError::CertificateRejected(
            "ratio a/b is certified only for b = unit and a in the weight family".into(),
        ));
    }
    let (ra, rb) = rayon::join(
        || estimate_densities(set, a, horizon, tail_fraction),
        || estimate_densities(set, b, horizon, tail_fraction),
    );
    let (ra, rb) = (ra?, rb?);
    Ok(MonotoneChain {
        lower_b: rb.lower_estimate,
        lower_a: ra.lower_estimate,
        upper_a: ra.upper_estimate,
        upper_b: rb.upper_estimate,
    })
}

/// Indices `n < horizon` with `a_{n+1} / a_n <= alpha`, and whether the
/// geometric decay `a_{n_k} <= a_0 alpha^(k-1)` holds along them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropIndices {
    pub indices: Vec<u64>,
    pub decay_holds: bool,
}

impl DropIndices {
    pub fn as_set(&self) -> IndexSet {
        IndexSet::Explicit { elements: self.indices.clone() }
    }
}

pub fn ratio_drop_indices(weight: &WeightSeq, alpha: &Rational, horizon: u64) -> Result<DropIndices, DensityError> {
    if *alpha <= 0 || *alpha >= 1 {
        return Err(DensityError::InvalidArgument("alpha must lie in (0, 1)".into()));
    }
    // Inside a constant piece the ratio is 1 > alpha, so only the last index of
    // each piece and harmonic stretches can qualify.
    let mut candidates = Vec::new();
    for p in weight.pieces(0, horizon) {
        match p.kind {
            PieceKind::Constant(_) => {}
            PieceKind::Harmonic => {
                // (n+1)/(n+2) <= alpha  iff  n <= (2 alpha - 1)/(1 - alpha)
                let bound = Rational::from(2 * alpha.clone() - 1) / Rational::from(1 - alpha.clone());
                if bound >= 0 {
                    let top = bound.floor().numer().to_u64().unwrap_or(u64::MAX);
                    candidates.extend(p.start..p.end.min(top.saturating_add(1)));
                }
            }
        }
        candidates.push(p.end - 1);
    }
    candidates.sort_unstable();
    candidates.dedup();
    let indices: Vec<u64> = candidates
        .into_iter()
        .filter(|&n| weight.value(n + 1) / weight.value(n) <= *alpha)
        .collect();
    let a0 = weight.value(0);
    let mut bound = a0;
    let mut decay_holds = true;
    for &n in &indices {
        if weight.value(n) > bound {
            decay_holds = false;
            break;
        }
        bound *= alpha;
    }
    Ok(DropIndices { indices, decay_holds })
}

/// The shift estimate behind `lower density of I+1 >= alpha * lower density of I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftGap {
    /// `Q_a(I+1, N)`.
    #[serde(with = "serde_text")]
    pub shifted: Rational,
    /// `Q_a(I, N)`.
    #[serde(with = "serde_text")]
    pub original: Rational,
    /// `[W(I+1,[0,N)) - alpha W(I,[0,N-1)) + alpha W(I ∩ D,[0,N-1))] / S(N)` with
    /// `D` the drop indices; non-negative whenever `a` is non-increasing.
    #[serde(with = "serde_text")]
    pub gap: Rational,
    /// `Q_a(I+1, N) <= Q_a(I, N)`.
    pub shift_not_larger: bool,
}

pub fn shift_quotient_gap(set: &IndexSet, weight: &WeightSeq, alpha: &Rational, n: u64) -> Result<ShiftGap, DensityError> {
    if n == 0 {
        return Err(DensityError::EmptyPrefix);
    }
    let drops = ratio_drop_indices(weight, alpha, n)?;
    let drops_in_set =
        IndexSet::explicit(drops.indices.into_iter().filter(|&d| set.contains(d)).collect());
    let shifted_set = set.clone().shifted(1);
    let total = weight.prefix_sum(n);
    let w_shift = weighted_sum(&shifted_set, weight, 0, n);
    let w_orig = weighted_sum(set, weight, 0, n);
    let w_orig_short = weighted_sum(set, weight, 0, n - 1);
    let w_drop_short = weighted_sum(&drops_in_set, weight, 0, n - 1);
    let gap_num = Rational::from(&w_shift - Rational::from(alpha * &w_orig_short))
        + Rational::from(alpha * &w_drop_short);
    let shifted = w_shift / &total;
    let original = w_orig / &total;
    Ok(ShiftGap {
        shift_not_larger: shifted <= original,
        shifted,
        original,
        gap: gap_num / total,
    })
}

/// `Q_a(D, N)` at each checkpoint for the drop set of `alpha` below the horizon.
pub fn drop_set_quotients(weight: &WeightSeq, alpha: &Rational, checkpoints: &[u64]) -> Result<Vec<Rational>, DensityError> {
    let horizon = checkpoints.iter().copied().max().unwrap_or(0);
    let drops = ratio_drop_indices(weight, alpha, horizon)?.as_set();
    Ok(super::quotient::quotients_at(&drops, weight, checkpoints))
}
