use std::fmt::Write as _;

use rayon::prelude::*;

use super::params::CTypeParams;
use super::sparse::SparseVec;
use super::CTypeError;
use crate::exactnum::{Dyadic, Scalar};

fn check_support<S: Scalar>(p: &CTypeParams, x: &SparseVec<S>) -> Result<(), CTypeError> {
    match x.max_index() {
        Some(j) if j >= p.dim() => Err(CTypeError::SupportOutOfRange { index: j, dim: p.dim() }),
        _ => Ok(()),
    }
}

/// One application of `T`:
///
/// - inside a block, `T e_j = w_{j+1} e_{j+1}`;
/// - at the end of block `n >= 1`, `T e_{b_{n+1}-1} = v_n e_{b_phi(n)} - (prod w)^-1 e_{b_n}`;
/// - at the end of block 0, `T e_{b_1-1} = -(prod w)^-1 e_0`.
pub fn apply<S: Scalar>(p: &CTypeParams, x: &SparseVec<S>) -> Result<SparseVec<S>, CTypeError> {
    check_support(p, x)?;
    Ok(step(p, x))
}

fn step<S: Scalar>(p: &CTypeParams, x: &SparseVec<S>) -> SparseVec<S> {
    let mut out = SparseVec::new();
    for (j, c) in x.iter() {
        let n = p.block_of(j);
        let start = p.b[n as usize];
        let end = p.b[n as usize + 1];
        if j + 1 < end {
            out.add_at(j + 1, &c.scale_pow2(p.weight_log(j + 1) as i64));
        } else {
            if n > 0 {
                out.add_at(p.b[p.phi[n as usize] as usize], &c.scale_pow2(p.v_exp[n as usize]));
            }
            out.add_at(start, &c.scale_pow2(-p.block_product_log(n)).neg_ref());
        }
    }
    out
}

/// Moves every coordinate `s` places forward inside its block; no coordinate
/// may reach the end of its block.
fn drift<S: Scalar>(p: &CTypeParams, x: &SparseVec<S>, s: u64) -> SparseVec<S> {
    if s == 0 {
        return x.clone();
    }
    SparseVec::from_entries(x.iter().map(|(j, c)| {
        let n = p.block_of(j);
        let o = j - p.b[n as usize];
        (j + s, c.scale_pow2(p.log_prod(n, o + 1, o + s)))
    }))
}

/// `T^m x`, advancing straight to the next block end instead of stepping.
pub fn apply_power<S: Scalar>(p: &CTypeParams, x: &SparseVec<S>, m: u64) -> Result<SparseVec<S>, CTypeError> {
    check_support(p, x)?;
    let mut state = x.clone();
    let mut remaining = m;
    while remaining > 0 && !state.is_empty() {
        // steps until the first coordinate wraps
        let dt = state.iter().map(|(j, _)| p.b[p.block_of(j) as usize + 1] - j).min().unwrap();
        if dt > remaining {
            state = drift(p, &state, remaining);
            break;
        }
        state = step(p, &drift(p, &state, dt - 1));
        remaining -= dt;
    }
    Ok(state)
}

/// `x, T x, ..., T^steps x`.
pub fn orbit<S: Scalar>(p: &CTypeParams, x: &SparseVec<S>, steps: u64) -> Result<Vec<SparseVec<S>>, CTypeError> {
    check_support(p, x)?;
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(x.clone());
    for _ in 0..steps {
        let next = step(p, out.last().unwrap());
        out.push(next);
    }
    Ok(out)
}

/// `step,index,mantissa,exponent` rows for every nonzero coefficient of the orbit.
pub fn orbit_csv(p: &CTypeParams, x: &SparseVec<Dyadic>, steps: u64) -> Result<String, CTypeError> {
    let mut s = String::from("step,index,mantissa,exponent\n");
    for (t, y) in orbit(p, x, steps)?.iter().enumerate() {
        for (j, c) in y.iter() {
            writeln!(s, "{t},{j},{},{}", c.mantissa(), c.exponent()).unwrap();
        }
    }
    Ok(s)
}

/// `P_n x`: the coordinates of block `n`.
pub fn project_block<S: Scalar>(p: &CTypeParams, x: &SparseVec<S>, n: u64) -> SparseVec<S> {
    x.restrict(p.b[n as usize], p.b[n as usize + 1])
}

/// The coordinates of blocks `0..n`.
pub fn project_below<S: Scalar>(p: &CTypeParams, x: &SparseVec<S>, n: u64) -> SparseVec<S> {
    x.restrict(0, p.b[n as usize])
}

/// Checks `T^(2 Delta_n) e_j = e_j` for every realized `j`, with `n` the block of `j`.
/// Returns the first failing coordinate.
pub fn periodicity_failure(p: &CTypeParams) -> Option<u64> {
    (0..p.dim()).into_par_iter().find_first(|&j| {
        let e = SparseVec::basis(j);
        let period = 2 * p.block_len(p.block_of(j));
        apply_power(p, &e, period).map(|y| y != e).unwrap_or(true)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctype::params::DEFAULT_COORDINATE_CAP;
    use crate::ctype::{build_psi, Schedule, ScheduleMode, ScheduleSeeds};
    use crate::exactnum::ExponentCap;
    use proptest::prelude::*;

    fn small() -> CTypeParams {
        let psi = build_psi(2, 4, 1, 6).unwrap();
        let s = Schedule::build(ScheduleMode::Structural, ScheduleSeeds { delta0: 1, tau0: 2, big_delta0: 2 }, psi, 4)
            .unwrap();
        CTypeParams::realize(&s, s.last_block(), ExponentCap::default(), DEFAULT_COORDINATE_CAP).unwrap()
    }

    #[test]
    fn block_zero_flips_sign() {
        let p = small();
        assert_eq!(p.block_len(0), 2);
        let e0 = SparseVec::basis(0);
        assert_eq!(apply(&p, &e0).unwrap(), SparseVec::basis(1));
        assert_eq!(apply_power(&p, &e0, 2).unwrap(), SparseVec::from_entries([(0, Dyadic::new(-1, 0))]));
        assert_eq!(apply_power(&p, &e0, 4).unwrap(), e0);
    }

    #[test]
    fn every_basis_vector_is_periodic() {
        let p = small();
        assert!(p.blocks() >= 5);
        assert_eq!(periodicity_failure(&p), None);
    }

    #[test]
    fn support_is_checked() {
        let p = small();
        let e = SparseVec::basis(p.dim());
        assert!(matches!(apply(&p, &e), Err(CTypeError::SupportOutOfRange { .. })));
    }

    #[test]
    fn orbit_csv_rows() {
        let p = small();
        let csv = orbit_csv(&p, &SparseVec::basis(0), 2).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,index,mantissa,exponent");
        assert_eq!(lines[1], "0,0,1,0");
        assert_eq!(lines.len(), 4);
    }

    proptest! {
        #[test]
        fn power_matches_repeated_steps(entries in proptest::collection::vec((0u64..400, -8i64..8, -3i64..3), 1..6), m in 0u64..300) {
            let p = small();
            let x = SparseVec::from_entries(entries.into_iter().map(|(j, a, e)| (j % p.dim(), Dyadic::new(a, e))));
            let mut y = x.clone();
            for _ in 0..m {
                y = apply(&p, &y).unwrap();
            }
            prop_assert_eq!(apply_power(&p, &x, m).unwrap(), y);
        }
    }
}
