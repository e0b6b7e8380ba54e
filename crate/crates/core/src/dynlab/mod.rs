//! Orbit experiments on realized C-type operators.
//!
//! - [`build_shadowing_vector`]: a small `z` whose orbit tracks `x` over a
//!   long window, with every intermediate identity checked exactly.
//! - [`prop50_check_all`], [`prop51_check`]: the two block estimates behind
//!   non-frequent hypercyclicity, checked exhaustively over a full period.
//! - [`hitting_density`], [`set_identity_check`]: visit sets of balls and their
//!   weighted density estimates.
//!
//! The inductive constructions that combine these single steps over a dense
//! sequence of targets are infinitary and are not attempted.

mod hits;
mod props;
mod shadow;

pub use hits::{
    hitting_density, orbit_period, set_identity_check, Ball, HitsOptions, HittingReport, IdentityReport, IdentityRow,
};
pub use props::{
    block_mass, prop50_check, prop50_check_all, prop50_gamma_constant, prop50_minimal_constant, prop51_bound,
    prop51_check, prop51_window, Prop50Report, Prop51Report,
};
pub use shadow::{build_shadowing_vector, ShadowingCertificate};

use rand::Rng;
use serde::ser::SerializeSeq;
use serde::Serializer;
use thiserror::Error;

use crate::ctype::{CTypeError, SparseVec};
use crate::densities::DensityError;
use crate::exactnum::Dyadic;
use crate::weightforge::ForgeError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynError {
    #[error("no admissible K: {0}")]
    NoFeasibleK(String),
    #[error("fiber ({i}, {j}) has no admissible k inside the realized blocks")]
    NoFeasibleFiber { i: u64, j: u64 },
    #[error("hypothesis fails for block {m}: the constant is below the orbit bound or outside (0, 1)")]
    HypothesisViolated { m: u64 },
    #[error("precondition fails: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    CType(#[from] CTypeError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
}

/// Up to `entries` coordinates in `[lo, hi)` with odd mantissas in `[-15, 15]`
/// and exponents in `[-4, 4]`.
pub fn random_sparse(rng: &mut impl Rng, lo: u64, hi: u64, entries: usize) -> SparseVec<Dyadic> {
    SparseVec::from_entries((0..entries).map(|_| {
        let m = 2 * rng.gen_range(-8i64..8) + 1;
        (rng.gen_range(lo..hi), Dyadic::new(m, rng.gen_range(-4i64..=4)))
    }))
}

/// `[[index, "m*2^e"], ...]`.
pub fn sparse_entries<S: Serializer>(x: &SparseVec<Dyadic>, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(x.len()))?;
    for (j, c) in x.iter() {
        seq.serialize_element(&(j, c.to_string()))?;
    }
    seq.end()
}
