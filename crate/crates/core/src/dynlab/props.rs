use rug::{Integer, Rational};
use serde::Serialize;

use super::DynError;
use crate::ctype::{apply, project_block, CTypeParams, SparseVec};
use crate::exactnum::{serde_text, Dyadic, PowerOfTwo};

fn pow2_rational(e: i64) -> Rational {
    Dyadic::pow2(e).to_rational()
}

/// `X_l = || sum_{k in block l} (prod_{s=k+1}^{b_{l+1}-1} w_s) x_k e_k ||`.
pub fn block_mass(p: &CTypeParams, x: &SparseVec<Dyadic>, l: u64) -> Rational {
    let start = p.b[l as usize];
    let len = p.block_len(l);
    project_block(p, x, l)
        .iter()
        .fold(Dyadic::zero(), |acc, (j, c)| acc.add_ref(&c.abs().scale_pow2(p.log_prod(l, j - start + 1, len - 1))))
        .to_rational()
}

/// `log2 (|v_m| sup_{j in block phi(m)} prod_{s=b_phi(m)+1}^{j} |w_s|)`: the least
/// admissible constant `C_m`.
pub fn prop50_minimal_constant(p: &CTypeParams, m: u64) -> i64 {
    let q = p.phi[m as usize];
    let best = (1..p.block_len(q)).map(|o| p.log_prod(q, 1, o)).max().unwrap_or(0).max(0);
    p.v_exp[m as usize] + best
}

/// `gamma_{psi2(k)}` for the group `k` of block `m`: the constant produced by the
/// non-frequent-hypercyclicity argument.
pub fn prop50_gamma_constant(p: &CTypeParams, m: u64) -> PowerOfTwo {
    let s = &p.schedule;
    let j = s.psi.psi(s.group_of(m)).1;
    s.gamma(j)
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop50Report {
    pub l: u64,
    pub n: u64,
    pub j_max: u64,
    #[serde(with = "serde_text")]
    pub c_l: Rational,
    #[serde(with = "serde_text")]
    pub x_l: Rational,
    /// `sup_{j <= j_max} ||P_n T^j P_l x||`.
    #[serde(with = "serde_text")]
    pub sup_norm: Rational,
    pub conclusion1: bool,
    /// First `N in [1, b_{l+1} - b_l]` where the second conclusion fails.
    pub conclusion2_failure: Option<u64>,
}

impl Prop50Report {
    pub fn holds(&self) -> bool {
        self.conclusion1 && self.conclusion2_failure.is_none()
    }
}

/// Checks the hypothesis for `1 <= m <= l` and both conclusions for every `n < l`.
/// `constants[m - 1] = C_m`; `None` uses the least admissible constants.
pub fn prop50_check_all(
    p: &CTypeParams,
    x: &SparseVec<Dyadic>,
    l: u64,
    constants: Option<&[Rational]>,
    j_max: u64,
) -> Result<Vec<Prop50Report>, DynError> {
    if l < 1 || l > p.n_max {
        return Err(DynError::InvalidArgument(format!("need 1 <= l <= n_max = {}", p.n_max)));
    }
    if constants.is_some_and(|c| (c.len() as u64) < l) {
        return Err(DynError::InvalidArgument("need one constant per block 1..=l".into()));
    }
    let mut c_l = Rational::new();
    for m in 1..=l {
        let least = pow2_rational(prop50_minimal_constant(p, m));
        let c = constants.map_or(least.clone(), |cs| cs[(m - 1) as usize].clone());
        if c <= 0 || c >= 1 || least > c {
            return Err(DynError::HypothesisViolated { m });
        }
        c_l = c;
    }
    let pl = project_block(p, x, l);
    let len = p.block_len(l);
    let steps = j_max.max(len);
    // per-block norms of T^j P_l x for blocks below l
    let mut norms: Vec<Vec<Rational>> = vec![Vec::with_capacity(steps as usize + 1); l as usize];
    let mut y = pl.clone();
    for j in 0..=steps {
        let mut acc = vec![Dyadic::zero(); l as usize];
        for (i, c) in y.iter() {
            let n = p.block_of(i);
            if n < l {
                acc[n as usize] = acc[n as usize].add_ref(&c.abs());
            }
        }
        for (n, a) in acc.into_iter().enumerate() {
            norms[n].push(a.to_rational());
        }
        if j < steps {
            y = apply(p, &y)?;
        }
    }
    let x_l = block_mass(p, x, l);
    let pl_norm = pl.norm_l1();
    let end = p.b[l as usize + 1];
    let bound1 = Rational::from(&c_l * &x_l);
    let mut reports = Vec::with_capacity(l as usize);
    for n in 0..l {
        let row = &norms[n as usize];
        let sup_norm = row[..=j_max as usize].iter().max().cloned().unwrap_or_default();
        let mut failure = None;
        let mut running = Rational::new();
        let mut best_tail = i64::MIN;
        for big_n in 1..=len {
            running = running.max(row[big_n as usize].clone());
            // k = b_{l+1} - N enters the window
            let k = end - big_n;
            best_tail = best_tail.max(p.log_prod_global(k + 1, end - 1));
            let rhs = Rational::from(&c_l * &pl_norm) * pow2_rational(best_tail);
            if running > rhs {
                failure = Some(big_n);
                break;
            }
        }
        reports.push(Prop50Report {
            l,
            n,
            j_max,
            c_l: c_l.clone(),
            x_l: x_l.clone(),
            conclusion1: sup_norm <= bound1,
            sup_norm,
            conclusion2_failure: failure,
        });
    }
    Ok(reports)
}

/// Single-`n` form of [`prop50_check_all`].
pub fn prop50_check(
    p: &CTypeParams,
    x: &SparseVec<Dyadic>,
    l: u64,
    n: u64,
    constants: Option<&[Rational]>,
    j_max: u64,
) -> Result<Prop50Report, DynError> {
    if n >= l {
        return Err(DynError::InvalidArgument("need n < l".into()));
    }
    Ok(prop50_check_all(p, x, l, constants, j_max)?.swap_remove(n as usize))
}

/// `1 - 2 (L - (K1 - K0)) (1/(J + 1) + 1/L)`.
pub fn prop51_bound(block_length: u64, k0: u64, k1: u64, j: u64) -> Result<Rational, DynError> {
    if k0 >= k1 || k1 > block_length {
        return Err(DynError::Precondition(format!("need K0 < K1 <= L, got K0={k0}, K1={k1}, L={block_length}")));
    }
    let outside = Integer::from(block_length - (k1 - k0));
    let inv = Rational::from((1, j + 1)) + Rational::from((1, block_length));
    Ok(Rational::from(1) - Rational::from(inv * outside) * 2u32)
}

/// `(kD + 2l + 1, Delta - 3D - 2l - 1)` for block `l` of group `k`, `D = delta^(psi2(k))`:
/// the flat stretch of the weight table.
pub fn prop51_window(p: &CTypeParams, l: u64) -> (u64, u64) {
    let k = p.schedule.group_of(l);
    let d = p.table_delta(l);
    (k * d + 2 * l + 1, p.block_len(l) - 3 * d - 2 * l - 1)
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop51Report {
    pub l: u64,
    pub k0: u64,
    pub k1: u64,
    pub j: u64,
    /// `log2 alpha`.
    pub alpha_log: i64,
    #[serde(with = "serde_text")]
    pub x_l: Rational,
    pub count: u64,
    #[serde(with = "serde_text")]
    pub bound: Rational,
    /// First `J' <= J` where the counted frequency falls below the bound.
    pub failure: Option<u64>,
}

impl Prop51Report {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

/// Counts `{0 <= j <= J : ||P_l T^j P_l x|| >= alpha^-1 X_l / 2}` and compares the
/// frequency with [`prop51_bound`] at every `J' <= J`.
pub fn prop51_check(
    p: &CTypeParams,
    x: &SparseVec<Dyadic>,
    l: u64,
    j: u64,
    window: Option<(u64, u64)>,
) -> Result<Prop51Report, DynError> {
    if l < 1 || l > p.n_max {
        return Err(DynError::InvalidArgument(format!("need 1 <= l <= n_max = {}", p.n_max)));
    }
    let (k0, k1) = window.unwrap_or_else(|| prop51_window(p, l));
    let len = p.block_len(l);
    prop51_bound(len, k0, k1, 0)?;
    let start = p.b[l as usize];
    if let Some(o) = (k0 + 1..k1).find(|&o| p.weight_log(start + o) != 0) {
        return Err(DynError::Precondition(format!("|w| != 1 at offset {o} inside (K0, K1)")));
    }
    let alpha_log = p.log_prod(l, k0 + 1, len - 1);
    let x_l = block_mass(p, x, l);
    let threshold = Rational::from(&x_l * pow2_rational(-alpha_log)) / 2u32;
    let mut y = project_block(p, x, l);
    let mut count = 0u64;
    let mut failure = None;
    for jj in 0..=j {
        if project_block(p, &y, l).norm_l1() >= threshold {
            count += 1;
        }
        let freq = Rational::from((count, jj + 1));
        if failure.is_none() && freq < prop51_bound(len, k0, k1, jj)? {
            failure = Some(jj);
        }
        if jj < j {
            y = apply(p, &y)?;
        }
    }
    let bound = prop51_bound(len, k0, k1, j)?;
    Ok(Prop51Report { l, k0, k1, j, alpha_log, x_l, count, bound, failure })
}
