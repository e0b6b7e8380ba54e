use rug::Integer;
use serde::{Deserialize, Serialize};

use super::schedule::{Schedule, ScheduleMode};
use super::CTypeError;
use crate::exactnum::ExponentCap;

/// Default bound on the number of realized coordinates `b_{n_max + 1}`.
pub const DEFAULT_COORDINATE_CAP: u64 = 1 << 22;

/// `log2 w` at offset `i in [1, len)` of block `n` in group `k`, with `d = delta^(psi2(k))`.
///
/// | offsets                              | weight |
/// |--------------------------------------|--------|
/// | `[1, k d + 2n + 1]`                  | 2      |
/// | `(k d + 2n + 1, len - 3d - 2n - 1)`  | 1      |
/// | `[len - 3d - 2n - 1, len - 2d)`      | 1/2    |
/// | `[len - 2d, len - d)`                | 2      |
/// | `[len - d, len)`                     | 1      |
pub fn table_log(k: u64, d: u64, n: u64, len: u64, i: u64) -> i8 {
    let head = k * d + 2 * n + 1;
    if i <= head {
        1
    } else if i + 3 * d + 2 * n + 1 < len {
        0
    } else if i + 2 * d < len {
        -1
    } else if i + d < len {
        1
    } else {
        0
    }
}

/// A materialized C-type operator on `l1` restricted to blocks `0..=n_max`.
///
/// Block `n` covers `[b_n, b_{n+1})`. Weights are stored as `log2 w_j` per
/// block offset; offset 0 is never read by the operator and holds 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CTypeParams {
    pub schedule: Schedule,
    pub n_max: u64,
    pub b: Vec<u64>,
    pub phi: Vec<u64>,
    /// `v_n = 2^v_exp[n]`; unused for block 0.
    pub v_exp: Vec<i64>,
    w_log: Vec<Vec<i8>>,
    prefix: Vec<Vec<i64>>,
    pub cap: ExponentCap,
}

/// Compact JSON view of realized parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsSummary {
    pub n_max: u64,
    pub b: Vec<u64>,
    pub phi: Vec<u64>,
    pub v_exp: Vec<i64>,
    /// Group `k` of each block.
    pub group: Vec<u64>,
    /// `delta^(psi2(k))` of each block (0 for block 0).
    pub table_delta: Vec<u64>,
    /// `log2` of the product of the block weights.
    pub product_log: Vec<i64>,
}

fn to_u64(x: &Integer, cap: ExponentCap, what: &str) -> Result<u64, CTypeError> {
    let v = cap.check(x)?;
    u64::try_from(v).map_err(|_| CTypeError::InvalidArgument(format!("{what} is negative")))
}

impl CTypeParams {
    /// Materializes blocks `0..=n_max` of a structural schedule.
    pub fn realize(schedule: &Schedule, n_max: u64, cap: ExponentCap, coordinate_cap: u64) -> Result<Self, CTypeError> {
        if schedule.mode == ScheduleMode::Asymptotic {
            return Err(CTypeError::NotMaterializable(
                "asymptotic schedules live in exponent space; use a structural schedule".into(),
            ));
        }
        if n_max > schedule.last_block() {
            return Err(CTypeError::InvalidArgument(format!(
                "n_max = {n_max} lies beyond group k_max (last block {})",
                schedule.last_block()
            )));
        }
        let mut b = vec![0u64];
        let (mut phi, mut v_exp, mut w_log) = (Vec::new(), Vec::new(), Vec::new());
        for n in 0..=n_max {
            let k = schedule.group_of(n);
            let len = to_u64(&schedule.big_delta[k as usize], cap, "Delta")?;
            let end = b[n as usize].checked_add(len).filter(|&e| e <= coordinate_cap).ok_or_else(|| {
                CTypeError::NotMaterializable(format!("more than {coordinate_cap} coordinates by block {n}"))
            })?;
            b.push(end);
            if n == 0 {
                phi.push(0);
                v_exp.push(0);
                w_log.push(vec![0i8; len as usize]);
                continue;
            }
            let j = schedule.psi.psi(k).1 as usize;
            let d = to_u64(&schedule.delta[j], cap, "delta")?;
            let tau = cap.check(&schedule.tau[j])?;
            phi.push(n - schedule.n_k(k));
            v_exp.push(-tau);
            let mut row = vec![0i8; len as usize];
            for (i, w) in row.iter_mut().enumerate().skip(1) {
                *w = table_log(k, d, n, len, i as u64);
            }
            w_log.push(row);
        }
        let mut p = CTypeParams {
            schedule: schedule.clone(),
            n_max,
            b,
            phi,
            v_exp,
            w_log,
            prefix: Vec::new(),
            cap,
        };
        p.rebuild();
        p.validate()?;
        Ok(p)
    }

    fn rebuild(&mut self) {
        self.prefix = self
            .w_log
            .iter()
            .map(|row| {
                let mut acc = 0i64;
                let mut out = Vec::with_capacity(row.len());
                out.push(0);
                for &w in row.iter().skip(1) {
                    acc += w as i64;
                    out.push(acc);
                }
                out
            })
            .collect();
    }

    pub fn blocks(&self) -> u64 {
        self.n_max + 1
    }

    /// `b_{n_max + 1}`: the realized coordinates are `[0, dim)`.
    pub fn dim(&self) -> u64 {
        self.b[self.b.len() - 1]
    }

    pub fn block_len(&self, n: u64) -> u64 {
        self.b[n as usize + 1] - self.b[n as usize]
    }

    /// Block containing coordinate `j < dim`.
    pub fn block_of(&self, j: u64) -> u64 {
        (self.b.partition_point(|&x| x <= j) - 1) as u64
    }

    /// `log2 w_j`.
    pub fn weight_log(&self, j: u64) -> i8 {
        let n = self.block_of(j);
        self.w_log[n as usize][(j - self.b[n as usize]) as usize]
    }

    /// `log2 prod_{i=b_n+lo}^{b_n+hi} w_i` for block offsets `1 <= lo`, `hi < len`;
    /// empty products (`lo > hi`) give 0.
    pub fn log_prod(&self, n: u64, lo: u64, hi: u64) -> i64 {
        if lo > hi {
            return 0;
        }
        let p = &self.prefix[n as usize];
        p[hi as usize] - p[lo as usize - 1]
    }

    /// `log2 prod_{i=lo}^{hi} w_i` for global indices inside one block.
    pub fn log_prod_global(&self, lo: u64, hi: u64) -> i64 {
        if lo > hi {
            return 0;
        }
        let n = self.block_of(lo);
        let base = self.b[n as usize];
        debug_assert!(hi < self.b[n as usize + 1]);
        self.log_prod(n, lo - base, hi - base)
    }

    /// `log2` of the full block product `prod_{i=b_n+1}^{b_{n+1}-1} w_i`.
    pub fn block_product_log(&self, n: u64) -> i64 {
        self.log_prod(n, 1, self.block_len(n) - 1)
    }

    /// Largest and smallest `log2 w_i` over realized `i >= 1`.
    pub fn weight_log_range(&self) -> (i8, i8) {
        let mut hi = i8::MIN;
        let mut lo = i8::MAX;
        for row in &self.w_log {
            for &w in row.iter().skip(1) {
                hi = hi.max(w);
                lo = lo.min(w);
            }
        }
        if hi < lo {
            (0, 0)
        } else {
            (hi, lo)
        }
    }

    /// `delta^(psi2(k))` for the group of block `n >= 1`.
    pub fn table_delta(&self, n: u64) -> u64 {
        let k = self.schedule.group_of(n);
        let j = self.schedule.psi.psi(k).1 as usize;
        self.schedule.delta[j].to_u64().expect("checked during realization")
    }

    pub fn summary(&self) -> ParamsSummary {
        ParamsSummary {
            n_max: self.n_max,
            b: self.b.clone(),
            phi: self.phi.clone(),
            v_exp: self.v_exp.clone(),
            group: (0..=self.n_max).map(|n| self.schedule.group_of(n)).collect(),
            table_delta: (0..=self.n_max).map(|n| if n == 0 { 0 } else { self.table_delta(n) }).collect(),
            product_log: (0..=self.n_max).map(|n| self.block_product_log(n)).collect(),
        }
    }

    /// Overwrites `log2 w_j` without validation.
    pub fn set_weight_log(&mut self, j: u64, e: i8) {
        let n = self.block_of(j);
        self.w_log[n as usize][(j - self.b[n as usize]) as usize] = e;
        self.rebuild();
    }

    /// Overwrites `v_n` without validation.
    pub fn set_v_exp(&mut self, n: u64, e: i64) {
        self.v_exp[n as usize] = e;
    }

    /// Overwrites `phi(n)` without validation.
    pub fn set_phi(&mut self, n: u64, p: u64) {
        self.phi[n as usize] = p;
    }

    /// Overwrites `b_n` without validation.
    pub fn set_b(&mut self, n: u64, x: u64) {
        self.b[n as usize] = x;
    }

    /// Re-derives every invariant from the raw tables.
    pub fn validate(&self) -> Result<(), CTypeError> {
        let fail = |invariant: &str, index: u64| Err(CTypeError::Validation { invariant: invariant.into(), index });
        let s = &self.schedule;
        let blocks = self.blocks() as usize;
        if self.b.len() != blocks + 1 || self.phi.len() != blocks || self.v_exp.len() != blocks || self.w_log.len() != blocks {
            return fail("table_lengths", 0);
        }
        if self.b[0] != 0 {
            return fail("b0", 0);
        }
        for n in 0..self.blocks() {
            let nu = n as usize;
            if self.b[nu + 1] <= self.b[nu] {
                return fail("b_increasing", n);
            }
            let len = self.block_len(n);
            if Integer::from(len) != s.big_delta[s.group_of(n) as usize] {
                return fail("block_length", n);
            }
            if self.w_log[nu].len() as u64 != len {
                return fail("weight_table_length", n);
            }
            if self.w_log[nu][0] != 0 {
                return fail("unused_weight", self.b[nu]);
            }
            if self.w_log[nu].iter().any(|&w| !(-1..=1).contains(&w)) {
                return fail("weight_values", n);
            }
            if n == 0 {
                if self.phi[0] != 0 {
                    return fail("phi", 0);
                }
                if let Some(i) = self.w_log[0].iter().position(|&w| w != 0) {
                    return fail("weight_table", i as u64);
                }
                continue;
            }
            let k = s.group_of(n);
            let p = self.phi[nu];
            if p >= n {
                return fail("phi_below", n);
            }
            if p != n - s.n_k(k) {
                return fail("phi", n);
            }
            let plen = self.block_len(p);
            if len % (2 * plen) != 0 {
                return fail("b_multiple", n);
            }
            let j = s.psi.psi(k).1 as usize;
            if Integer::from(-self.v_exp[nu]) != s.tau[j] {
                return fail("v", n);
            }
            let d = self.table_delta(n);
            for i in 1..len {
                if self.w_log[nu][i as usize] != table_log(k, d, n, len, i) {
                    return fail("weight_table", self.b[nu] + i);
                }
            }
            let sum: i64 = self.w_log[nu].iter().map(|&w| w as i64).sum();
            if Integer::from(sum) != Integer::from(k) * d {
                return fail("weight_product", n);
            }
            if self.prefix[nu].last().copied() != Some(sum) {
                return fail("prefix_cache", n);
            }
        }
        Ok(())
    }
}
