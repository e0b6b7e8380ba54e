//! Seeded generators for randomized checks.
//!
//! Every trial draws from its own ChaCha stream, so results do not depend on
//! how trials are scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use crate::densities::{BlockTail, IndexSet, WeightSeq};

/// Stream `trial` of the generator seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Periodic, interval, geometric-block, complemented or shifted sets.
pub fn random_index_set(rng: &mut impl Rng) -> IndexSet {
    match rng.gen_range(0..5) {
        0 => {
            let m = rng.gen_range(1..=16u64);
            let residues: Vec<u64> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
            IndexSet::periodic(residues, m).expect("residues below modulus")
        }
        1 => {
            let mut intervals = Vec::new();
            let mut at = rng.gen_range(0..50u64);
            for _ in 0..rng.gen_range(0..12) {
                let len = rng.gen_range(1..2000u64);
                intervals.push((at, at + len));
                at += len + rng.gen_range(1..2000u64);
            }
            IndexSet::intervals(intervals).expect("disjoint increasing intervals")
        }
        2 => {
            let base = rng.gen_range(2..=5u64);
            let start = rng.gen_range(1..base);
            let end = rng.gen_range(start + 1..=base);
            IndexSet::geometric_blocks(base, start, end, rng.gen_range(0..3)).expect("valid block rule")
        }
        3 => random_index_set(rng).complement(),
        _ => {
            let off = rng.gen_range(0..100u64);
            random_index_set(rng).shifted(off)
        }
    }
}

/// Unit, harmonic, block-constant or table-headed weights.
pub fn random_weight(rng: &mut impl Rng) -> WeightSeq {
    match rng.gen_range(0..4) {
        0 => WeightSeq::Unit,
        1 => WeightSeq::Harmonic,
        2 => {
            let mut bp = vec![0u64];
            for _ in 0..rng.gen_range(1..10) {
                let last = *bp.last().unwrap();
                bp.push(last + rng.gen_range(1..500u64));
            }
            let tail = if rng.gen_bool(0.5) { BlockTail::Doubling } else { BlockTail::Repeat };
            WeightSeq::block_constant(bp, tail).expect("increasing breakpoints")
        }
        _ => {
            let values: Vec<Rational> =
                (0..rng.gen_range(1..40)).map(|_| Rational::from((rng.gen_range(1..100u64), rng.gen_range(1..100u64)))).collect();
            WeightSeq::table(values, WeightSeq::Harmonic).expect("positive values")
        }
    }
}
