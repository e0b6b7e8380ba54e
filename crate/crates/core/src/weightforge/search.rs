use rug::{Integer, Rational};

use crate::densities::IndexSet;

/// `|I ∩ [n, r)| >= floor * (r - n)`, exactly.
pub(crate) fn block_qualifies(set: &IndexSet, n: u64, r: u64, floor: &Rational) -> bool {
    let count = Integer::from(set.count_in(n, r));
    let lhs = count * floor.denom();
    let rhs = Integer::from(floor.numer() * Integer::from(r - n));
    lhs >= rhs
}

/// Right endpoint for a block starting at `n` with length at least `min_len`,
/// ending at or before `horizon`, whose `I`-density reaches `floor`.
///
/// Run ends of `I` (`r - 1 in I`, `r` not in `I`) are preferred: the smallest
/// qualifying one is taken. Without any, the smallest qualifying endpoint is
/// used. `None` when nothing qualifies.
pub(crate) fn find_block_end(set: &IndexSet, n: u64, min_len: u64, horizon: u64, floor: &Rational) -> Option<u64> {
    let first = n.checked_add(min_len)?;
    if first > horizon {
        return None;
    }
    if let Some(r) = first_qualifying_run_end(set, n, first, horizon, floor) {
        return Some(r);
    }
    (first..=horizon).find(|&r| block_qualifies(set, n, r, floor))
}

fn first_qualifying_run_end(set: &IndexSet, n: u64, first: u64, horizon: u64, floor: &Rational) -> Option<u64> {
    // runs are scanned in doubling windows so dense sets are not listed wholesale
    let mut lo = first - 1;
    let mut width = (first - n).max(1024);
    while lo < horizon {
        let hi = lo.saturating_add(width).min(horizon);
        for (_, e) in set.runs(lo, hi) {
            if e < first || e > horizon || (e == hi && set.contains(e)) {
                continue;
            }
            if block_qualifies(set, n, e, floor) {
                return Some(e);
            }
        }
        lo = hi;
        width = width.saturating_mul(2);
    }
    None
}

/// `(1 - 2^-k) * delta`.
pub(crate) fn floor_for(delta: &Rational, k: u32) -> Rational {
    let mut f = Rational::from(1) - Rational::from((1, Integer::from(1) << k));
    f *= delta;
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    #[test]
    fn prefers_run_ends() {
        let q = IndexSet::quartic_blocks();
        assert_eq!(find_block_end(&q, 0, 1, 1000, &ratio(0, 1)), Some(2));
        assert_eq!(find_block_end(&q, 2, 4, 1000, &ratio(1, 3)), Some(8));
        assert_eq!(find_block_end(&q, 8, 12, 1000, &ratio(1, 2)), Some(32));
        assert_eq!(find_block_end(&q, 8, 12, 1000, &ratio(3, 4)), None);
    }

    #[test]
    fn falls_back_without_run_ends() {
        let all = IndexSet::all();
        assert_eq!(find_block_end(&all, 3, 4, 100, &ratio(1, 1)), Some(7));
        assert_eq!(find_block_end(&all, 3, 4, 6, &ratio(1, 1)), None);
    }

    #[test]
    fn floors() {
        assert_eq!(floor_for(&ratio(2, 3), 0), 0);
        assert_eq!(floor_for(&ratio(2, 3), 2), ratio(1, 2));
    }
}
