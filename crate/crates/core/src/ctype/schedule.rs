use rug::Integer;
use serde::{Deserialize, Serialize};

use super::psi::PsiMap;
use super::CTypeError;
use crate::exactnum::{serde_text, PowerOfTwo};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// Small values satisfying only the structural constraints, so that the
    /// operator can be materialized.
    Structural,
    /// Values meeting every growth condition of the final construction; kept
    /// in exponent space only.
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSeeds {
    pub delta0: u64,
    pub tau0: u64,
    pub big_delta0: u64,
}

/// `delta^(k)`, `tau^(k)` and `Delta^(k)` together with the block indices `n_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub mode: ScheduleMode,
    pub seeds: ScheduleSeeds,
    pub k_max: u64,
    pub psi: PsiMap,
    /// `n[k] = n_k` for `0 <= k <= len - 1`; `n_0 = 0`, `n_1 = 1`, `n_{k+1} = n_k + psi1(k)`.
    pub n: Vec<u64>,
    /// `delta[k] = delta^(k)` for `0 <= k <= max(k_max, max psi2)`.
    #[serde(with = "serde_text::int_vec")]
    pub delta: Vec<Integer>,
    #[serde(with = "serde_text::int_vec")]
    pub tau: Vec<Integer>,
    /// `big_delta[k] = Delta^(k)` for `0 <= k <= k_max`.
    #[serde(with = "serde_text::int_vec")]
    pub big_delta: Vec<Integer>,
}

/// Exponent of `gamma_k = 2^(k delta^(k-1) + 2 n_k + 1 - tau^(k))`.
pub fn gamma_exponent(k: u64, delta_prev: &Integer, n_k: u64, tau_k: &Integer) -> Integer {
    Integer::from(delta_prev * k) + 2 * n_k + 1u32 - tau_k
}

/// Least `tau` with `gamma_exponent(k, delta_prev, n_k, tau) <= bound`.
pub fn min_tau_for_gamma(k: u64, delta_prev: &Integer, n_k: u64, bound: &Integer) -> Integer {
    Integer::from(delta_prev * k) + 2 * n_k + 1u32 - bound
}

/// Per-`k` outcome of the growth conditions, `1 <= k <= k_max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub k: u64,
    #[serde(with = "int_text")]
    pub gamma_exponent: Integer,
    /// `gamma_k <= min(2^-16k, min_{s<k} gamma_s^2)`.
    pub gamma: bool,
    /// `delta^(k) - tau^(k) >= k`.
    pub gap: bool,
    /// `(k - 1) delta^(k-1) / delta^(k) <= 1/k`.
    pub ratio: bool,
    /// `(k delta^(psi2(k)) + n_{k+1}) / Delta^(k) <= 1/k`.
    pub block: bool,
    /// `Delta^(k)` is a multiple of `2 Delta^(k-1)` exceeding
    /// `(k + 3) delta^(psi2(k)) + 4 n_{k+1} + 2`, and `delta`, `tau` increase.
    pub structural: bool,
}

impl ConditionRow {
    pub fn growth_ok(&self) -> bool {
        self.gamma && self.gap && self.ratio && self.block
    }
}

mod int_text {
    use rug::Integer;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Integer, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integer, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl Schedule {
    pub fn build(mode: ScheduleMode, seeds: ScheduleSeeds, psi: PsiMap, k_max: u64) -> Result<Self, CTypeError> {
        if k_max < 1 {
            return Err(CTypeError::InvalidArgument("k_max must be at least 1".into()));
        }
        if seeds.delta0 < 1 || seeds.big_delta0 < 1 {
            return Err(CTypeError::InvalidArgument("delta0 and big_delta0 must be positive".into()));
        }
        psi.validate()?;
        if psi.horizon() < k_max {
            return Err(CTypeError::InvalidArgument(format!(
                "psi is tabulated up to {} but k_max = {k_max}",
                psi.horizon()
            )));
        }
        let top_psi2 = psi.psi2[..k_max as usize].iter().copied().max().unwrap_or(0);
        let top = k_max.max(top_psi2);
        if psi.horizon() < top {
            return Err(CTypeError::InvalidArgument(format!(
                "delta is needed up to index {top}, psi is tabulated only up to {}",
                psi.horizon()
            )));
        }
        let mut n = vec![0u64, 1];
        for k in 1..=top {
            n.push(n[k as usize] + psi.psi(k).0);
        }
        let (delta, tau) = match mode {
            ScheduleMode::Structural => (
                (0..=top).map(|k| Integer::from(seeds.delta0 + k)).collect(),
                (0..=top).map(|k| Integer::from(seeds.tau0 + k)).collect(),
            ),
            ScheduleMode::Asymptotic => asymptotic_delta_tau(&seeds, &n, top),
        };
        let mut big_delta = vec![Integer::from(seeds.big_delta0)];
        for k in 1..=k_max {
            let d = &delta[psi.psi(k).1 as usize];
            let n_next = n[(k + 1) as usize];
            let step = Integer::from(&big_delta[(k - 1) as usize] * 2u32);
            // strictly above (k + 3) d + 4 n_{k+1} + 2
            let size = Integer::from(d * (k + 3)) + 4 * n_next + 2u32;
            let mut mult = Integer::from(&size / &step) + 1u32;
            if mode == ScheduleMode::Asymptotic {
                // at least k (k d + n_{k+1})
                let ratio = (Integer::from(d * k) + n_next) * k;
                let need = Integer::from(ratio + &step - 1u32) / &step;
                mult = mult.max(need);
            }
            big_delta.push(step * mult);
        }
        Ok(Schedule { mode, seeds, k_max, psi, n, delta, tau, big_delta })
    }

    /// `n_k`.
    pub fn n_k(&self, k: u64) -> u64 {
        self.n[k as usize]
    }

    /// The `k` with `n_k <= n < n_{k+1}`; block 0 is the only block of group 0.
    pub fn group_of(&self, n: u64) -> u64 {
        (self.n.partition_point(|&m| m <= n) - 1) as u64
    }

    /// Last block index of group `k_max`.
    pub fn last_block(&self) -> u64 {
        self.n[(self.k_max + 1) as usize] - 1
    }

    pub fn gamma_exponent(&self, k: u64) -> Integer {
        gamma_exponent(k, &self.delta[(k - 1) as usize], self.n_k(k), &self.tau[k as usize])
    }

    pub fn gamma(&self, k: u64) -> PowerOfTwo {
        PowerOfTwo::new(self.gamma_exponent(k))
    }

    /// Evaluates every growth condition for `1 <= k <= k_max`, in exponent space.
    pub fn conditions(&self) -> Vec<ConditionRow> {
        let mut rows = Vec::with_capacity(self.k_max as usize);
        let mut min_sq: Option<PowerOfTwo> = None;
        for k in 1..=self.k_max {
            let ku = k as usize;
            let g = self.gamma(k);
            let mut bound = PowerOfTwo::new(-16 * k as i64);
            if let Some(m) = &min_sq {
                bound = bound.min(m.clone());
            }
            let gamma = g.leq(&bound);
            let sq = g.square();
            min_sq = Some(match min_sq {
                Some(m) => m.min(sq),
                None => sq,
            });
            let gap = Integer::from(&self.delta[ku] - &self.tau[ku]) >= k;
            let ratio = Integer::from(&self.delta[ku - 1] * (k * (k - 1))) <= self.delta[ku];
            let d = &self.delta[self.psi.psi(k).1 as usize];
            let n_next = self.n_k(k + 1);
            let block = (Integer::from(d * k) + n_next) * k <= self.big_delta[ku];
            let prev = &self.big_delta[ku - 1];
            let size = Integer::from(d * (k + 3)) + 4 * n_next + 2u32;
            let structural = self.big_delta[ku] > size
                && Integer::from(&self.big_delta[ku] % Integer::from(prev * 2u32)) == 0
                && self.delta[ku] > self.delta[ku - 1]
                && self.tau[ku] > self.tau[ku - 1];
            rows.push(ConditionRow { k, gamma_exponent: g.exponent().clone(), gamma, gap, ratio, block, structural });
        }
        rows
    }
}

/// `tau^(k)` minimal for the gamma bound, then `delta^(k)` minimal for the gap
/// and ratio conditions, inductively up to `top`.
fn asymptotic_delta_tau(seeds: &ScheduleSeeds, n: &[u64], top: u64) -> (Vec<Integer>, Vec<Integer>) {
    let mut delta = vec![Integer::from(seeds.delta0)];
    let mut tau = vec![Integer::from(seeds.tau0)];
    let mut min_e: Option<Integer> = None;
    for k in 1..=top {
        let ku = k as usize;
        let mut bound = Integer::from(-16 * k as i64);
        if let Some(m) = &min_e {
            bound = bound.min(Integer::from(m * 2u32));
        }
        let t = min_tau_for_gamma(k, &delta[ku - 1], n[ku], &bound).max(Integer::from(&tau[ku - 1] + 1u32));
        let e = gamma_exponent(k, &delta[ku - 1], n[ku], &t);
        min_e = Some(match min_e {
            Some(m) => m.min(e),
            None => e,
        });
        let d = Integer::from(&delta[ku - 1] + 1u32)
            .max(Integer::from(&t + k))
            .max(Integer::from(&delta[ku - 1] * (k * (k - 1))));
        tau.push(t);
        delta.push(d);
    }
    (delta, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctype::build_psi;

    fn toy(mode: ScheduleMode, k_max: u64) -> Schedule {
        let psi = build_psi(1, 3, 3, 8).unwrap();
        Schedule::build(mode, ScheduleSeeds { delta0: 8, tau0: 1, big_delta0: 1 }, psi, k_max).unwrap()
    }

    #[test]
    fn structural_chain() {
        let s = toy(ScheduleMode::Structural, 5);
        let bd: Vec<u64> = s.big_delta.iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(bd, vec![1, 52, 104, 208, 416, 832]);
        assert_eq!(&s.n[..7], &[0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(s.group_of(0), 0);
        assert_eq!(s.group_of(5), 5);
        assert!(s.conditions().iter().all(|r| r.structural));
    }

    #[test]
    fn gamma_helpers() {
        // delta0 = 2, n_1 = 1, tau1 = 40: 2 + 2 + 1 - 40
        assert_eq!(gamma_exponent(1, &Integer::from(2), 1, &Integer::from(40)), -35);
        let bound = Integer::from(-32).min(Integer::from(-35 * 2));
        assert_eq!(bound, -70);
        assert_eq!(min_tau_for_gamma(1, &Integer::from(2), 1, &Integer::from(-35)), 40);
    }

    #[test]
    fn asymptotic_meets_every_condition() {
        let psi = build_psi(2, 6, 1, 12).unwrap();
        let s = Schedule::build(ScheduleMode::Asymptotic, ScheduleSeeds { delta0: 2, tau0: 1, big_delta0: 2 }, psi, 10)
            .unwrap();
        let rows = s.conditions();
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.growth_ok() && r.structural), "{rows:?}");
        // tau^(1) is minimal: 2 + 2 + 1 + 16
        assert_eq!(s.tau[1], 21);
        assert_eq!(s.gamma_exponent(1), -16);
    }

    #[test]
    fn structural_fails_growth() {
        let s = toy(ScheduleMode::Structural, 3);
        assert!(s.conditions().iter().any(|r| !r.growth_ok()));
    }

    #[test]
    fn short_psi_is_rejected() {
        let psi = build_psi(1, 3, 1, 3).unwrap();
        let seeds = ScheduleSeeds { delta0: 8, tau0: 1, big_delta0: 1 };
        assert!(Schedule::build(ScheduleMode::Structural, seeds, psi, 5).is_err());
    }
}
