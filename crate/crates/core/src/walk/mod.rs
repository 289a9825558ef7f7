//! Simple random walk on Z^d and its local-time fields.

mod engine;
mod field;
mod leap;
mod site;

pub use engine::{
    run_continuous, run_continuous_in, run_discrete, run_discrete_in, run_jump_sampled, sample_jump_chain,
    sample_jump_chain_in, step_direction, uniform_step, ContinuousSummary, ContinuousWalkResult,
    DiscreteSummary, DiscreteWalkResult, Horizon, JumpChain, WalkConfig,
};
pub use field::{Compensated, LocalTimeField, Mode};
pub use leap::{
    count_target_visits, origin_local_time_sample, truncation_bias_bound, two_point_local_time_sample,
    LocalTimeSample,
};
pub use site::{Path, Site, SiteCodec, MAX_DIM, MIN_DIM};

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::replicate::map_replicates;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: u64,
    /// Empirical `max_x P(S_n = x)`.
    pub sup_probability: f64,
    /// `sup_probability · n^{d/2}` (with `0^{d/2}` read as 1).
    pub scaled: f64,
    pub argmax: String,
    /// Endpoints whose coordinate sum has the wrong parity; always 0.
    pub parity_violations: u64,
}

/// Empirical endpoint laws of `reps` walks for each `n`, scaled by the
/// diffusive factor. Diagnostic only.
pub fn diffusive_scaling_check(d: usize, step_counts: &[u64], reps: u64, seed: u64) -> Result<Vec<ScalingRow>> {
    let codec = SiteCodec::new(d)?;
    if step_counts.is_empty() {
        return Err(Error::input("diffusive_scaling_check needs at least one step count"));
    }
    if reps == 0 {
        return Err(Error::input("diffusive_scaling_check needs reps > 0"));
    }
    let mut rows = Vec::with_capacity(step_counts.len());
    for (idx, &n) in step_counts.iter().enumerate() {
        if n > codec.coord_limit() {
            return Err(Error::config(format!("step count {n} exceeds the step counter limit")));
        }
        let stream_seed = seed.wrapping_add(idx as u64);
        let ends = map_replicates(stream_seed, 0..reps, |_, rng| {
            let mut key = codec.origin();
            for _ in 0..n {
                key = codec.step(key, step_direction(rng, d));
            }
            key
        });
        let mut hist: FxHashMap<u128, u64> = FxHashMap::default();
        let mut parity_violations = 0;
        for &k in &ends {
            *hist.entry(k).or_insert(0) += 1;
            let s = codec.decode(k);
            if (s.coords().iter().sum::<i64>() - n as i64).rem_euclid(2) != 0 {
                parity_violations += 1;
            }
        }
        let (best_key, best) = hist
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(&k, &c)| (k, c))
            .expect("reps > 0");
        let sup = best as f64 / reps as f64;
        rows.push(ScalingRow {
            n,
            sup_probability: sup,
            scaled: if n == 0 { sup } else { sup * (n as f64).powf(d as f64 / 2.0) },
            argmax: codec.decode(best_key).to_string(),
            parity_violations,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_scale_to_one() {
        let rows = diffusive_scaling_check(3, &[0], 100, 1).unwrap();
        assert_eq!(rows[0].scaled, 1.0);
        assert_eq!(rows[0].argmax, "0 0 0");
    }

    #[test]
    fn no_parity_violations() {
        let rows = diffusive_scaling_check(4, &[1, 2, 7, 16], 2000, 5).unwrap();
        assert!(rows.iter().all(|r| r.parity_violations == 0 && r.scaled.is_finite()));
        assert!(diffusive_scaling_check(3, &[], 10, 0).is_err());
    }
}
