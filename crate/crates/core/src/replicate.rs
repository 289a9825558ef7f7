//! Parallel replicate plans.
//!
//! Replicate `r` of an experiment with seed `s` draws only from
//! `Stream::new(s, r)`, so results are independent of scheduling. Outputs
//! are collected in replicate order.

use rayon::prelude::*;
use std::ops::Range;

use crate::stats::{Accumulator, Stream};

/// Run `f` for every replicate index in `range`, in parallel, returning the
/// outputs in index order.
pub fn map_replicates<T, F>(seed: u64, range: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut Stream) -> T + Sync + Send,
{
    range
        .into_par_iter()
        .map(|r| {
            let mut rng = Stream::new(seed, r);
            f(r, &mut rng)
        })
        .collect()
}

/// Like [`map_replicates`] with per-worker scratch state (hash maps and
/// buffers reused across replicates).
pub fn map_replicates_with<S, T, I, F>(seed: u64, range: Range<u64>, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64, &mut Stream) -> T + Sync + Send,
{
    range
        .into_par_iter()
        .map_init(init, |scratch, r| {
            let mut rng = Stream::new(seed, r);
            f(scratch, r, &mut rng)
        })
        .collect()
}

/// Fold one value per replicate into an accumulator. Exact merging makes the
/// result independent of how rayon splits the range.
pub fn accumulate_replicates<F>(seed: u64, range: Range<u64>, f: F) -> Accumulator
where
    F: Fn(u64, &mut Stream) -> f64 + Sync + Send,
{
    range
        .into_par_iter()
        .fold(Accumulator::new, |mut acc, r| {
            let mut rng = Stream::new(seed, r);
            acc.push(f(r, &mut rng));
            acc
        })
        .reduce(Accumulator::new, |mut a, b| {
            a.absorb(&b);
            a
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_determinism() {
        let a = map_replicates(5, 0..100, |r, s| (r, s.next_word()));
        let b = map_replicates(5, 0..100, |r, s| (r, s.next_word()));
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, &(r, _))| i as u64 == r));
        let split: Vec<_> = map_replicates(5, 0..40, |r, s| (r, s.next_word()))
            .into_iter()
            .chain(map_replicates(5, 40..100, |r, s| (r, s.next_word())))
            .collect();
        assert_eq!(a, split);
    }

    #[test]
    fn accumulation_matches_sequential() {
        let acc = accumulate_replicates(1, 0..1000, |_, s| s.uniform());
        let mut seq = Accumulator::new();
        for r in 0..1000 {
            seq.push(Stream::new(1, r).uniform());
        }
        assert_eq!(acc, seq);
    }
}
