use rug::Rational;
use serde::Serialize;

use super::{sparse_entries, DynError};
use crate::ctype::{apply, apply_power, CTypeParams, SparseVec};
use crate::densities::{estimate_densities, DensityReport, IndexSet, WeightSeq};
use crate::exactnum::{ratio, serde_text, Dyadic};
use crate::weightforge::synthesize_weight_thm1;

/// Open `l1` ball `{y : ||y - center|| < radius}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ball {
    #[serde(serialize_with = "sparse_entries")]
    pub center: SparseVec<Dyadic>,
    #[serde(with = "serde_text")]
    pub radius: Rational,
}

impl Ball {
    pub fn contains(&self, y: &SparseVec<Dyadic>) -> bool {
        y.sub(&self.center).norm_l1() < self.radius
    }
}

#[derive(Clone, Debug)]
pub struct HitsOptions {
    /// Steps `0..=step_horizon` are listed; default 4 times the largest block period.
    pub step_horizon: Option<u64>,
    /// Horizon of the density estimate of the periodic visit set.
    pub density_horizon: u64,
    pub tail_fraction: Rational,
    pub tol: Rational,
}

impl Default for HitsOptions {
    fn default() -> Self {
        HitsOptions { step_horizon: None, density_horizon: 1 << 16, tail_fraction: ratio(1, 2), tol: ratio(1, 10) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HittingReport {
    #[serde(serialize_with = "sparse_entries")]
    pub x: SparseVec<Dyadic>,
    pub ball: Ball,
    pub step_horizon: u64,
    /// `{m <= step_horizon : ||T^m x - center|| < radius}`.
    pub visits: Vec<u64>,
    /// Least `p` with `T^p x = x`.
    pub orbit_period: u64,
    /// Least `p` with `T^p center = center`.
    pub center_period: u64,
    /// The visit set over all `m >= 0`, periodic with the orbit period.
    pub visit_set: IndexSet,
    pub report: DensityReport,
    /// `1 / (2 per(center))`, set when the visits contain every multiple of the
    /// center period up to the horizon.
    #[serde(with = "opt_text")]
    pub period_bound: Option<Rational>,
    pub meets_period_bound: Option<bool>,
}

mod opt_text {
    use rug::Rational;
    use serde::Serializer;

    use crate::exactnum::format_rational;

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }
}

/// `2 (b_{n+1} - b_n)` for the last block touched by `x`; `T^that x = x`.
fn block_period(p: &CTypeParams, x: &SparseVec<Dyadic>) -> u64 {
    x.max_index().map_or(1, |j| 2 * p.block_len(p.block_of(j)))
}

/// Least period of `x` under `T`, among the divisors of its block period.
pub fn orbit_period(p: &CTypeParams, x: &SparseVec<Dyadic>) -> Result<u64, DynError> {
    let full = block_period(p, x);
    let mut divisors: Vec<u64> = (1..=full).filter(|d| full % d == 0).collect();
    divisors.sort_unstable();
    for d in divisors {
        if apply_power(p, x, d)? == *x {
            return Ok(d);
        }
    }
    Err(DynError::InvalidArgument("orbit is not periodic within the realized blocks".into()))
}

/// Exact visit set of the orbit of `x` in a ball, with density estimates under `weight`.
pub fn hitting_density(
    p: &CTypeParams,
    x: &SparseVec<Dyadic>,
    ball: &Ball,
    weight: &WeightSeq,
    opts: &HitsOptions,
) -> Result<HittingReport, DynError> {
    if ball.radius <= 0 {
        return Err(DynError::InvalidArgument("radius must be positive".into()));
    }
    let per = orbit_period(p, x)?;
    let center_period = orbit_period(p, &ball.center)?;
    let step_horizon = opts.step_horizon.unwrap_or(4 * block_period(p, x).max(block_period(p, &ball.center)));
    let mut visits = Vec::new();
    let mut residues = Vec::new();
    let mut y = x.clone();
    for m in 0..=step_horizon.max(per - 1) {
        if ball.contains(&y) {
            if m <= step_horizon {
                visits.push(m);
            }
            if m < per {
                residues.push(m);
            }
        }
        y = apply(p, &y)?;
    }
    let visit_set = IndexSet::periodic(residues, per)?;
    let report = estimate_densities(&visit_set, weight, opts.density_horizon, &opts.tail_fraction)?;
    let pattern = (0..=step_horizon / center_period).all(|q| visits.binary_search(&(q * center_period)).is_ok());
    let (period_bound, meets) = if pattern {
        let b = Rational::from((1, 2 * center_period));
        let ok = report.upper_estimate >= Rational::from(&b - &opts.tol);
        (Some(b), Some(ok))
    } else {
        (None, None)
    };
    Ok(HittingReport {
        x: x.clone(),
        ball: ball.clone(),
        step_horizon,
        visits,
        orbit_period: per,
        center_period,
        visit_set,
        report,
        period_bound,
        meets_period_bound: meets,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub vector: usize,
    pub ball: usize,
    /// `"unit"`, `"weight[i]"` or `"thm1"`.
    pub weight: String,
    #[serde(with = "serde_text")]
    pub lower: Rational,
    #[serde(with = "serde_text")]
    pub upper: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
    /// `(vector, ball, weight)` triples where the finite-horizon chain breaks.
    pub chain_failures: Vec<(usize, usize, String)>,
    pub scope: String,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.chain_failures.is_empty()
    }
}

/// Tabulates estimates under the unit weight and every supplied weight, and checks
/// `lower_unit <= lower_a + tol`, `lower_a <= upper_a`, `upper_a <= upper_unit + tol`.
/// For visit sets of positive density, a weight synthesized for that set must
/// also lift its lower estimate to the unweighted upper estimate within `tol`.
pub fn set_identity_check(
    p: &CTypeParams,
    vectors: &[SparseVec<Dyadic>],
    balls: &[Ball],
    weights: &[WeightSeq],
    opts: &HitsOptions,
) -> Result<IdentityReport, DynError> {
    if let Some(i) = weights.iter().position(|w| !w.in_family()) {
        return Err(DynError::InvalidArgument(format!("weight[{i}] is not admissible")));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (vi, x) in vectors.iter().enumerate() {
        for (bi, ball) in balls.iter().enumerate() {
            let unit = hitting_density(p, x, ball, &WeightSeq::Unit, opts)?;
            let (lu, uu) = (unit.report.lower_estimate.clone(), unit.report.upper_estimate.clone());
            rows.push(IdentityRow { vector: vi, ball: bi, weight: "unit".into(), lower: lu.clone(), upper: uu.clone() });
            for (wi, w) in weights.iter().enumerate() {
                let r = estimate_densities(&unit.visit_set, w, opts.density_horizon, &opts.tail_fraction)?;
                let label = format!("weight[{wi}]");
                let chain = lu <= Rational::from(&r.lower_estimate + &opts.tol)
                    && r.lower_estimate <= r.upper_estimate
                    && r.upper_estimate <= Rational::from(&uu + &opts.tol);
                if !chain {
                    failures.push((vi, bi, label.clone()));
                }
                rows.push(IdentityRow { vector: vi, ball: bi, weight: label, lower: r.lower_estimate, upper: r.upper_estimate });
            }
            if let IndexSet::Periodic { residues, modulus } = &unit.visit_set {
                if !residues.is_empty() {
                    let delta = Rational::from((residues.len() as u64, *modulus));
                    let (_, w) = synthesize_weight_thm1(&unit.visit_set, &delta, opts.density_horizon)?;
                    let r = estimate_densities(&unit.visit_set, &w, opts.density_horizon, &opts.tail_fraction)?;
                    if r.lower_estimate < Rational::from(&uu - &opts.tol) {
                        failures.push((vi, bi, "thm1".into()));
                    }
                    rows.push(IdentityRow { vector: vi, ball: bi, weight: "thm1".into(), lower: r.lower_estimate, upper: r.upper_estimate });
                }
            }
        }
    }
    Ok(IdentityReport {
        rows,
        chain_failures: failures,
        scope: "finite families and finite horizons; the identities over all admissible weights are limit statements and are not decided".into(),
    })
}
