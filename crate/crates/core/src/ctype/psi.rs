use serde::{Deserialize, Serialize};

use super::CTypeError;

/// `k -> (psi1(k), psi2(k))` for `1 <= k <= horizon`, with the promise indices `j_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiMap {
    /// `psi1[k - 1] = psi1(k)`.
    pub psi1: Vec<u64>,
    /// `psi2[k - 1] = psi2(k)`.
    pub psi2: Vec<u64>,
    /// `promise[i - 1] = j_i`: every fiber `(i, j)` with `j_i <= j <= j_max` is hit
    /// at least `multiplicity` times below the horizon.
    pub promise: Vec<u64>,
    pub i_max: u64,
    pub j_max: u64,
    pub multiplicity: u64,
}

impl PsiMap {
    pub fn horizon(&self) -> u64 {
        self.psi1.len() as u64
    }

    pub fn psi(&self, k: u64) -> (u64, u64) {
        (self.psi1[(k - 1) as usize], self.psi2[(k - 1) as usize])
    }

    /// `{k : psi(k) = (i, j)}`, increasing.
    pub fn fiber(&self, i: u64, j: u64) -> Vec<u64> {
        (1..=self.horizon()).filter(|&k| self.psi(k) == (i, j)).collect()
    }

    pub fn max_psi2(&self) -> u64 {
        self.psi2.iter().copied().max().unwrap_or(0)
    }

    /// Builds a map from raw tables and checks the ordering constraints.
    pub fn from_table(psi1: Vec<u64>, psi2: Vec<u64>) -> Result<Self, CTypeError> {
        if psi1.len() != psi2.len() {
            return Err(CTypeError::InvalidArgument("psi tables differ in length".into()));
        }
        let m = PsiMap {
            i_max: psi1.iter().copied().max().unwrap_or(0),
            j_max: psi2.iter().copied().max().unwrap_or(0),
            promise: Vec::new(),
            multiplicity: 0,
            psi1,
            psi2,
        };
        m.validate()?;
        Ok(m)
    }

    /// `1 <= psi1(k) < min(k + 1, psi2(k))` and `psi2(k) > max{psi2(j) : j < psi1(k)}`.
    pub fn validate(&self) -> Result<(), CTypeError> {
        let mut running_max = vec![0u64; self.psi2.len() + 1];
        for k in 1..=self.psi2.len() {
            running_max[k] = running_max[k - 1].max(self.psi2[k - 1]);
        }
        for k in 1..=self.horizon() {
            let (i, j) = self.psi(k);
            if i < 1 || i >= (k + 1).min(j) {
                return Err(CTypeError::Psi { k, reason: format!("need 1 <= psi1 < min(k+1, psi2), got ({i}, {j})") });
            }
            // max over 1 <= j' < i; i <= k so these are already tabulated
            let earlier = running_max[(i - 1) as usize];
            if j <= earlier {
                return Err(CTypeError::Psi { k, reason: format!("psi2 = {j} is not above earlier maximum {earlier}") });
            }
        }
        Ok(())
    }
}

/// Deterministic round-robin over the pairs `(i, j)`, `1 <= i <= min(i_max, j - 1)`,
/// `2 <= j <= j_max`, ordered by `j` then `i`. At each `k` the next pair that is
/// admissible at `k` is taken.
pub fn build_psi(i_max: u64, j_max: u64, multiplicity: u64, horizon: u64) -> Result<PsiMap, CTypeError> {
    if i_max < 1 || j_max < 2 || horizon < 1 {
        return Err(CTypeError::InvalidArgument("need i_max >= 1, j_max >= 2, horizon >= 1".into()));
    }
    let targets: Vec<(u64, u64)> =
        (2..=j_max).flat_map(|j| (1..=i_max.min(j - 1)).map(move |i| (i, j))).collect();
    let mut psi1 = Vec::with_capacity(horizon as usize);
    let mut psi2: Vec<u64> = Vec::with_capacity(horizon as usize);
    // prefix_max[i] = max{psi2(k') : k' < i}
    let mut prefix_max = vec![0u64];
    let mut cursor = 0usize;
    for k in 1..=horizon {
        let admissible = |&(i, j): &(u64, u64)| i <= k && j > prefix_max[(i - 1) as usize];
        let pick = (0..targets.len())
            .map(|s| (cursor + s) % targets.len())
            .find(|&t| admissible(&targets[t]))
            .expect("(1, j_max) is admissible at every k");
        let (i, j) = targets[pick];
        psi1.push(i);
        psi2.push(j);
        prefix_max.push(prefix_max[(k - 1) as usize].max(j));
        cursor = (pick + 1) % targets.len();
    }
    let promise: Vec<u64> = (1..=i_max)
        .map(|i| {
            let m = prefix_max.get((i - 1) as usize).copied().unwrap_or(u64::MAX - 1);
            (i + 1).max(m + 1)
        })
        .collect();
    let map = PsiMap { psi1, psi2, promise, i_max, j_max, multiplicity };
    map.validate()?;
    for i in 1..=i_max {
        for j in map.promise[(i - 1) as usize]..=j_max {
            let hits = map.fiber(i, j).len() as u64;
            if hits < multiplicity {
                return Err(CTypeError::Infeasible { i, j, hits });
            }
        }
    }
    Ok(map)
}
