//! Integer sets, weight sequences and exact weighted density quotients.
//!
//! Prefixes are half-open: `Q_a(I, N)` sums over `[0, N)`. Upper and lower
//! densities are limits and are never computed; [`estimate_densities`] reports
//! the extrema of exact quotients over a finite tail window instead.

mod indexset;
mod lemmas;
mod quotient;
mod weights;

pub use indexset::{BlockGenerator, IndexSet, MAX_MODULUS};
pub use lemmas::{
    drop_set_quotients, duality_check, monotonicity_check, ratio_drop_indices, shift_quotient_gap,
    DropIndices, MonotoneChain, ShiftGap,
};
pub use quotient::{
    density_quotient, estimate_densities, estimate_densities_with, geometric_grid, quotients_at,
    tail_start, weighted_sum, DensityReport, GridOptions,
};
pub use weights::{
    harmonic_over, harmonic_range, BlockTail, FamilyCertificate, Piece, PieceKind, PrefixCursor,
    WeightSeq,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DensityError {
    #[error("density quotients need a non-empty prefix (N >= 1)")]
    EmptyPrefix,
    #[error("invalid index set: {0}")]
    InvalidSet(String),
    #[error("invalid weight sequence: {0}")]
    InvalidWeight(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("weight pair rejected: {0}")]
    CertificateRejected(String),
    #[error("report output failed: {0}")]
    Io(String),
}
