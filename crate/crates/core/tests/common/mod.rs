#![allow(dead_code)]

use snv_core::distance::{DistanceSpace, TimeLabels};
use snv_core::field::Column;
use snv_core::oracle::{random_instance, RandomInstanceSpec};
use snv_core::pipeline::EdgeTerm;
use snv_core::rips::FilteredComplex;

/// Instance parameters cycling through n in 1..=10, m in 0..=4, d_max in 1..=4.
pub fn suite_spec(seed: u64) -> RandomInstanceSpec {
    RandomInstanceSpec {
        seed,
        n: 1 + (seed % 10) as usize,
        horizon: ((seed / 10) % 5) as usize,
        d_max: 1 + (seed / 50) % 4,
    }
}

pub fn suite_instance(seed: u64) -> (DistanceSpace, TimeLabels) {
    random_instance(suite_spec(seed))
}

/// Point-indexed edge terms as a chain over edge positions of `complex`.
/// `local` maps global point indices to the complex's point indices.
pub fn to_chain(terms: &[EdgeTerm], complex: &FilteredComplex, local: impl Fn(usize) -> usize) -> Column {
    let mut chain: Column = terms
        .iter()
        .map(|&(u, v, c)| {
            let pos = complex
                .edge_position(local(u), local(v))
                .unwrap_or_else(|| panic!("edge ({u}, {v}) missing from complex"));
            (pos, c)
        })
        .collect();
    chain.sort_unstable_by_key(|e| e.0);
    chain
}

/// Whether the set of steps in `0..=horizon` with `member(i)` is an interval.
pub fn is_contiguous(horizon: usize, member: impl Fn(usize) -> bool) -> bool {
    let steps: Vec<usize> = (0..=horizon).filter(|&i| member(i)).collect();
    steps.windows(2).all(|w| w[1] == w[0] + 1)
}
