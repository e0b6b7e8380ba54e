use rug::{Integer, Rational};
use serde::Serialize;

use super::{sparse_entries, DynError};
use crate::ctype::{apply, apply_power, CTypeParams, SparseVec};
use crate::exactnum::{serde_text, Dyadic, PowerOfTwo};
use crate::weightforge::AlphaSequence;

/// A vector `z` with `||z|| < eps` whose orbit follows `x` from step `2 delta^(K)` on.
#[derive(Clone, Debug, Serialize)]
pub struct ShadowingCertificate {
    #[serde(serialize_with = "sparse_entries")]
    pub x: SparseVec<Dyadic>,
    #[serde(with = "serde_text")]
    pub epsilon: Rational,
    pub k0: u64,
    pub big_k: u64,
    pub k: u64,
    /// `2 delta^(K)`.
    pub n: u64,
    /// `alpha_n`.
    pub alpha_n: u64,
    #[serde(serialize_with = "sparse_entries")]
    pub z: SparseVec<Dyadic>,
    #[serde(with = "serde_text")]
    pub norm_z: Rational,
    /// Largest `||T^(n + m) z - T^m x||` over `0 <= m <= alpha_n * n`.
    #[serde(with = "serde_text")]
    pub max_orbit_error: Rational,
    /// `|v_n| prod_{i=b_{n+1}-2 delta^(K)}^{b_{n+1}-1} |w_i| = 2^(delta^(K) - tau^(K))` on every block of group `k`.
    pub eq9: bool,
    /// The same product from `b_n + m + 1` is at least `2^(delta^(K) - tau^(K))` for every `m`.
    pub eq10: bool,
    pub gap_exponent: i64,
}

impl ShadowingCertificate {
    pub fn holds(&self) -> bool {
        self.norm_z < self.epsilon && self.max_orbit_error < self.epsilon && self.eq9 && self.eq10
    }

    /// `2^(delta^(K) - tau^(K))`.
    pub fn gap(&self) -> PowerOfTwo {
        PowerOfTwo::new(self.gap_exponent)
    }
}

/// `||x|| 2^(b (hi - lo)) / 2^(delta - tau) < eps` with `2^hi = sup|w|`, `2^lo = inf|w|`.
fn eps_inequality(norm: &Rational, b: u64, spread: i64, gap: i64, eps: &Rational) -> bool {
    let e = b as i64 * spread - gap;
    let mut lhs = norm.clone();
    if e >= 0 {
        lhs *= Integer::from(Integer::u_pow_u(2, e as u32));
    } else {
        lhs /= Integer::from(Integer::u_pow_u(2, (-e) as u32));
    }
    lhs < *eps
}

/// Builds `z` for `x` supported below `b_{n_{k0}}`, searching the smallest
/// admissible `K` and then the smallest `k` in the fiber `psi^-1(n_{k0}, K)`.
pub fn build_shadowing_vector(
    p: &CTypeParams,
    x: &SparseVec<Dyadic>,
    eps: &Rational,
    alpha: &AlphaSequence,
) -> Result<ShadowingCertificate, DynError> {
    if *eps <= 0 {
        return Err(DynError::InvalidArgument("epsilon must be positive".into()));
    }
    let s = &p.schedule;
    let top = x.max_index().unwrap_or(0);
    let k0 = (1..=s.k_max + 1)
        .find(|&k| s.n_k(k) <= p.blocks() && top < p.b[s.n_k(k) as usize])
        .ok_or_else(|| DynError::NoFeasibleK(format!("support reaches {top}, beyond every realized b_(n_k0)")))?;
    let i = s.n_k(k0);
    let b_edge = p.b[i as usize];
    if i > s.psi.i_max {
        return Err(DynError::NoFeasibleK(format!("n_k0 = {i} exceeds i_max = {}", s.psi.i_max)));
    }
    let j_start = if s.psi.promise.is_empty() { i + 1 } else { s.psi.promise[(i - 1) as usize] };
    let (hi, lo) = p.weight_log_range();
    let spread = (hi - lo) as i64;
    let norm = x.norm_l1();
    let mut rejected = Vec::new();
    let mut fiber_miss = None;
    for big_k in j_start..=s.psi.j_max {
        let d = &s.delta[big_k as usize];
        let (Some(d), Some(tau)) = (d.to_u64(), s.tau[big_k as usize].to_i64()) else {
            rejected.push(format!("K={big_k}: delta too large"));
            continue;
        };
        let gap = d as i64 - tau;
        if d <= b_edge {
            rejected.push(format!("K={big_k}: delta={d} <= b={b_edge}"));
            continue;
        }
        if !eps_inequality(&norm, b_edge, spread, gap, eps) {
            rejected.push(format!("K={big_k}: eps inequality fails"));
            continue;
        }
        let n = 2 * d;
        if n > alpha.n_max() {
            rejected.push(format!("K={big_k}: alpha known only up to {}", alpha.n_max()));
            continue;
        }
        let a = alpha.alpha(n);
        let found = s.psi.fiber(i, big_k).into_iter().find(|&k| {
            k >= 2 * a + 1 && k <= s.k_max && a * n <= (k - 1) * d && s.n_k(k) + i - 1 <= p.n_max
        });
        match found {
            Some(k) => return Ok(certify(p, x, eps, k0, big_k, k, d, tau, a)),
            None => fiber_miss = Some(big_k),
        }
    }
    match fiber_miss {
        Some(j) => Err(DynError::NoFeasibleFiber { i, j }),
        None => Err(DynError::NoFeasibleK(rejected.join("; "))),
    }
}

#[allow(clippy::too_many_arguments)]
fn certify(
    p: &CTypeParams,
    x: &SparseVec<Dyadic>,
    eps: &Rational,
    k0: u64,
    big_k: u64,
    k: u64,
    d: u64,
    tau: i64,
    a: u64,
) -> ShadowingCertificate {
    let s = &p.schedule;
    let nk = s.n_k(k);
    let mut z = SparseVec::new();
    for (j, c) in x.iter() {
        let l = p.block_of(j);
        let r = j - p.b[l as usize];
        let n = nk + l;
        let end = p.b[n as usize + 1];
        let target = end - 2 * d + r;
        let e = -p.v_exp[n as usize] - p.log_prod_global(target + 1, end - 1) - p.log_prod(l, 1, r);
        z.add_at(target, &c.scale_pow2(e));
    }
    let gap = d as i64 - tau;
    let mut eq9 = true;
    let mut eq10 = true;
    for n in nk..s.n_k(k + 1) {
        let (start, end) = (p.b[n as usize], p.b[n as usize + 1]);
        let v = p.v_exp[n as usize];
        eq9 &= v + p.log_prod_global(end - 2 * d, end - 1) == gap;
        for m in 0..=a * 2 * d {
            eq10 &= v + p.log_prod_global(start + m + 1, end - 1) >= gap;
        }
    }
    let mut y = apply_power(p, &z, 2 * d).expect("z lies in realized blocks");
    let mut xm = x.clone();
    let mut max_err = Rational::new();
    for m in 0..=a * 2 * d {
        let err = y.sub(&xm).norm_l1();
        if err > max_err {
            max_err = err;
        }
        if m < a * 2 * d {
            y = apply(p, &y).unwrap();
            xm = apply(p, &xm).unwrap();
        }
    }
    ShadowingCertificate {
        x: x.clone(),
        epsilon: eps.clone(),
        k0,
        big_k,
        k,
        n: 2 * d,
        alpha_n: a,
        norm_z: z.norm_l1(),
        z,
        max_orbit_error: max_err,
        eq9,
        eq10,
        gap_exponent: gap,
    }
}
