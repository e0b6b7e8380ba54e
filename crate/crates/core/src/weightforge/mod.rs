//! Constructive weight synthesis.
//!
//! - [`synthesize_weight_thm1`]: a block-constant weight whose lower weighted
//!   density on `I` approaches a supplied upper-density target.
//! - [`synthesize_weight_multi`]: one weight serving finitely many sets, with
//!   blocks shared out by a partition of block indices with bounded gaps.
//! - [`alpha_sequence`]: the minimal integers `alpha_n` for which the window
//!   `[n, (1 + alpha_n) n)` carries half of the weight mass up to its end.
//!
//! Every output is certified only below its horizon.

mod alpha;
mod multi;
mod search;
mod thm1;

pub use alpha::{alpha_condition, alpha_sequence, AlphaSequence, DEFAULT_ALPHA_CAP};
pub use multi::{check_multi_bound, synthesize_weight_multi, MultiPlan, PartitionWithBoundedGaps};
pub use thm1::{check_thm1_bound, synthesize_weight_thm1, thm1_quotient_bound, BlockPlan};

use thiserror::Error;

use crate::densities::DensityError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForgeError {
    #[error("no qualifying block {k} below the horizon (target density too high or horizon too small)")]
    HorizonExhausted { k: u32 },
    #[error("no qualifying block {block} for set {part} below the horizon")]
    HorizonExhaustedPart { part: usize, block: u64 },
    #[error("no alpha up to the cap satisfies the window inequality at n = {n}")]
    ScanExhausted { n: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Density(#[from] DensityError),
}
