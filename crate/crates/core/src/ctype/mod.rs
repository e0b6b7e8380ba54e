//! Block-structured C-type operators on `l1`.
//!
//! - [`build_psi`]: the map `psi` whose fibers drive the choice of
//!   `delta^(psi2(k))` for the blocks of group `k`.
//! - [`Schedule`]: `delta^(k)`, `tau^(k)`, `Delta^(k)` in structural mode
//!   (materializable) or asymptotic mode (exponent space only).
//! - [`CTypeParams`]: realized `w`, `v`, `phi`, `b` on blocks `0..=n_max`.
//! - [`apply`], [`apply_power`]: exact action on finitely supported vectors.

mod operator;
mod params;
mod presets;
mod psi;
mod schedule;
mod sparse;

pub use operator::{apply, apply_power, orbit, orbit_csv, periodicity_failure, project_below, project_block};
pub use params::{table_log, CTypeParams, ParamsSummary, DEFAULT_COORDINATE_CAP};
pub use presets::{preset_params, preset_schedule, PRESETS};
pub use psi::{build_psi, PsiMap};
pub use schedule::{gamma_exponent, min_tau_for_gamma, ConditionRow, Schedule, ScheduleMode, ScheduleSeeds};
pub use sparse::SparseVec;

use thiserror::Error;

use crate::exactnum::NumError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CTypeError {
    #[error("psi violates its constraints at k = {k}: {reason}")]
    Psi { k: u64, reason: String },
    #[error("fiber ({i}, {j}) is hit {hits} times below the horizon")]
    Infeasible { i: u64, j: u64, hits: u64 },
    #[error("parameter invariant {invariant} fails at index {index}")]
    Validation { invariant: String, index: u64 },
    #[error("vector has support at {index}, outside the realized coordinates [0, {dim})")]
    SupportOutOfRange { index: u64, dim: u64 },
    #[error("cannot materialize: {0}")]
    NotMaterializable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Num(#[from] NumError),
}
