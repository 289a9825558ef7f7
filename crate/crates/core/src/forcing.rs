//! The forcing construction for the continuous-time downward lower bound:
//! threshold crossings, capped post-threshold holding times, the event `B`
//! and a weighted sampler for `P(B)`.
//!
//! All quantities live on the jump-sampled clock: the window is the
//! skeleton positions `0..=n̂` with their full holding times, which is
//! exactly the occupation measured by `ℓ̃(n̂, ·)`.

use rustc_hash::FxHashMap;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::laws::{empirical_law_check, ExponentialLaw, LawCheckReport};
use crate::replicate::{map_replicates, map_replicates_with};
use crate::stats::{wilson_interval, Accumulator, Stream};
use crate::walk::{
    run_discrete_in, sample_jump_chain_in, step_direction, JumpChain, LocalTimeField, Mode, Path, Site,
    SiteCodec, WalkConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForcingParams {
    pub d: usize,
    pub beta: f64,
    pub eta: f64,
    pub kappa: f64,
    pub delta: f64,
    pub n: u64,
}

impl ForcingParams {
    pub const DEFAULT_KAPPA: f64 = 0.9;
    pub const DEFAULT_ETA: f64 = 0.15;
    pub const DEFAULT_DELTA: f64 = 0.5;

    pub fn new(d: usize, beta: f64, n: u64) -> Self {
        Self {
            d,
            beta,
            eta: Self::DEFAULT_ETA,
            kappa: Self::DEFAULT_KAPPA,
            delta: Self::DEFAULT_DELTA,
            n,
        }
    }

    pub fn validate(&self, gamma: f64) -> Result<()> {
        SiteCodec::new(self.d)?;
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::config(format!("forcing needs 0 < beta <= 1, got {}", self.beta)));
        }
        if !(self.kappa > 1.0 - self.beta / 2.0 && self.kappa < 1.0) {
            return Err(Error::config(format!(
                "kappa = {} must lie in (1 - beta/2, 1) = ({}, 1)",
                self.kappa,
                1.0 - self.beta / 2.0
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("eta = {} must be > 0", self.eta)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::config(format!("delta = {} must be > 0", self.delta)));
        }
        if !((2.0 * gamma * self.eta).exp_m1() < self.delta / 2.0) {
            return Err(Error::config(format!(
                "eta = {} violates exp(2 gamma eta) - 1 < delta/2 with delta = {}",
                self.eta, self.delta
            )));
        }
        if self.n < 2 {
            return Err(Error::config("n must be at least 2"));
        }
        if !(self.lambda(gamma) > 0.0) {
            return Err(Error::config(format!(
                "Lambda_n = beta log(n)/gamma - eta = {} must be > 0",
                self.lambda(gamma)
            )));
        }
        Ok(())
    }

    /// `n̂ = ⌊n + n^κ⌋`.
    pub fn n_hat(&self) -> u64 {
        (self.n as f64 + (self.n as f64).powf(self.kappa)).floor() as u64
    }

    /// `βγ⁻¹ log n`.
    pub fn target(&self, gamma: f64) -> f64 {
        self.beta / gamma * (self.n as f64).ln()
    }

    /// `Λ_n = βγ⁻¹ log n − η`.
    pub fn lambda(&self, gamma: f64) -> f64 {
        self.target(gamma) - self.eta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub site: Site,
    /// 1-based crossing index.
    pub j: usize,
    /// `M_j`, returns after the crossing within the window.
    pub returns: u64,
    /// `h_j^0, ..., h_j^{M_j}`.
    pub holding_times: Vec<f64>,
}

impl Crossing {
    /// Local time gained above `Λ_n`.
    pub fn post_threshold_time(&self) -> f64 {
        self.holding_times.iter().sum()
    }

    fn within_caps(&self, eta: f64) -> bool {
        self.holding_times
            .iter()
            .enumerate()
            .all(|(k, &h)| h < eta / 2f64.powi(k as i32 + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcingTrace {
    pub lambda: f64,
    pub eta: f64,
    pub n_hat: u64,
    pub crossings: Vec<Crossing>,
    pub in_b: bool,
    /// Final skeleton position and window clock, to tie the trace to its run.
    final_key: u128,
    window_time_bits: u64,
}

impl ForcingTrace {
    /// `(M_1, ..., M_𝒩)`.
    pub fn returns(&self) -> Vec<u64> {
        self.crossings.iter().map(|c| c.returns).collect()
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.crossings {
            let h: Vec<String> = c.holding_times.iter().map(|h| format!("{h:.17e}")).collect();
            out.push_str(&format!("{} {} {} {}\n", c.site, c.j, c.returns, h.join(" ")));
        }
        out
    }
}

fn window_time(chain: &JumpChain, n_hat: u64) -> f64 {
    chain.holds[..=n_hat as usize].iter().sum()
}

fn check_window(chain: &JumpChain, n_hat: u64) -> Result<()> {
    if (chain.len() as u64) < n_hat + 1 {
        return Err(Error::input(format!(
            "run has {} positions, the window needs {}",
            chain.len(),
            n_hat + 1
        )));
    }
    Ok(())
}

/// Replays positions `0..=n̂` of `chain`, recording every site whose local
/// time strictly exceeds `Λ_n` and its capped holding times.
pub fn detect_forcing_trace(chain: &JumpChain, params: &ForcingParams, gamma: f64) -> Result<ForcingTrace> {
    params.validate(gamma)?;
    let n_hat = params.n_hat();
    check_window(chain, n_hat)?;
    let lambda = params.lambda(gamma);
    let keys = chain.path.keys();
    // site → (local time, crossing index)
    let mut state: FxHashMap<u128, (f64, Option<usize>)> = FxHashMap::default();
    let mut crossings: Vec<Crossing> = Vec::new();
    for (i, &key) in keys.iter().enumerate().take(n_hat as usize + 1) {
        let hold = chain.holds[i];
        let entry = state.entry(key).or_insert((0.0, None));
        match entry.1 {
            Some(j) => {
                crossings[j].returns += 1;
                crossings[j].holding_times.push(hold);
            }
            None => {
                let after = entry.0 + hold;
                if entry.0 <= lambda && after > lambda {
                    entry.1 = Some(crossings.len());
                    crossings.push(Crossing {
                        site: chain.path.codec().decode(key),
                        j: crossings.len() + 1,
                        returns: 0,
                        holding_times: vec![after - lambda],
                    });
                }
            }
        }
        entry.0 += hold;
    }
    let in_b = crossings.iter().all(|c| c.within_caps(params.eta));
    Ok(ForcingTrace {
        lambda,
        eta: params.eta,
        n_hat,
        crossings,
        in_b,
        final_key: keys[n_hat as usize],
        window_time_bits: window_time(chain, n_hat).to_bits(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclusionCheck {
    pub in_b: bool,
    /// `ℓ̃*(n̂)`.
    pub max_local_time: f64,
    pub target: f64,
    /// `in_b` holds but `ℓ̃*(n̂)` exceeds the target.
    pub violated: bool,
}

/// `B ⊂ {ℓ̃*(n̂) ≤ βγ⁻¹ log n}` on one realization.
pub fn check_inclusion(trace: &ForcingTrace, chain: &JumpChain, params: &ForcingParams, gamma: f64) -> Result<InclusionCheck> {
    let n_hat = params.n_hat();
    if trace.n_hat != n_hat
        || (chain.len() as u64) < n_hat + 1
        || chain.path.keys()[n_hat as usize] != trace.final_key
        || window_time(chain, n_hat).to_bits() != trace.window_time_bits
    {
        return Err(Error::input("trace does not belong to this run"));
    }
    let mut field = LocalTimeField::new(Mode::Continuous, *chain.path.codec());
    for (i, &key) in chain.path.keys().iter().enumerate().take(n_hat as usize + 1) {
        field.add_time(key, chain.holds[i]);
    }
    let max_local_time = field.max();
    let target = params.target(gamma);
    Ok(InclusionCheck {
        in_b: trace.in_b,
        max_local_time,
        target,
        violated: trace.in_b && max_local_time > target,
    })
}

/// `Π_j Π_{k=0}^{M_j} (1 − e^{−η/2^{k+1}})`.
pub fn conditional_b_probability(returns: &[u64], eta: f64) -> f64 {
    let log: f64 = returns
        .iter()
        .map(|&m| (0..=m).map(|k| cap_log_mass(eta / 2f64.powi(k as i32 + 1))).sum::<f64>())
        .sum();
    log.exp()
}

/// `log(1 − e^{−cap})`.
fn cap_log_mass(cap: f64) -> f64 {
    (-(-cap).exp_m1()).ln()
}

/// Traces of `reps` jump-sampled runs, each paired with its inclusion check.
pub fn sample_traces(params: &ForcingParams, gamma: f64, reps: u64, seed: u64) -> Result<Vec<(ForcingTrace, InclusionCheck)>> {
    params.validate(gamma)?;
    let codec = SiteCodec::new(params.d)?;
    let n_hat = params.n_hat();
    let out = map_replicates_with(
        seed,
        0..reps,
        || JumpChain::new(codec),
        |chain, r, _| -> Result<(ForcingTrace, InclusionCheck)> {
            let cfg = WalkConfig::continuous(params.d, 1.0, seed, r);
            sample_jump_chain_in(&cfg, n_hat, chain)?;
            let trace = detect_forcing_trace(chain, params, gamma)?;
            let check = check_inclusion(&trace, chain, params, gamma)?;
            Ok((trace, check))
        },
    );
    out.into_iter().collect()
}

/// Pooled `h_j^k` against the unit exponential law.
pub fn holding_time_law_check(traces: &[ForcingTrace]) -> Result<LawCheckReport> {
    let pooled: Vec<f64> = traces
        .iter()
        .flat_map(|t| t.crossings.iter().flat_map(|c| c.holding_times.iter().copied()))
        .collect();
    let levels = [0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0];
    empirical_law_check(&pooled, &ExponentialLaw::new(1.0)?, &levels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductBin {
    /// `(M_1, ..., M_𝒩)` sorted.
    pub returns: Vec<u64>,
    pub count: u64,
    pub in_b: u64,
    pub empirical: f64,
    pub theory: f64,
    pub z: f64,
}

/// Empirical `P(B | 𝒩, M)` per class with at least `min_count` traces.
pub fn product_formula_bins(traces: &[ForcingTrace], eta: f64, min_count: u64) -> Vec<ProductBin> {
    let mut bins: BTreeMap<Vec<u64>, (u64, u64)> = BTreeMap::new();
    for t in traces {
        let mut key = t.returns();
        key.sort_unstable();
        let e = bins.entry(key).or_insert((0, 0));
        e.0 += 1;
        e.1 += u64::from(t.in_b);
    }
    bins.into_iter()
        .filter(|(_, (c, _))| *c >= min_count.max(1))
        .map(|(returns, (count, in_b))| {
            let theory = conditional_b_probability(&returns, eta);
            let p = in_b as f64 / count as f64;
            let se = (theory * (1.0 - theory) / count as f64).sqrt();
            ProductBin {
                z: if se > 0.0 { (p - theory) / se } else { 0.0 },
                returns,
                count,
                in_b,
                empirical: p,
                theory,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSample {
    pub weight: f64,
    /// `ℓ̃*(n̂) ≤ βγ⁻¹ log n` on the forced path.
    pub target_hit: bool,
    pub trace: ForcingTrace,
}

/// One forced replicate: every post-threshold holding time is drawn from
/// the unit exponential truncated to its cap and the weight collects the
/// cap masses.
pub fn weighted_replicate(params: &ForcingParams, gamma: f64, rng: &mut Stream) -> Result<WeightedSample> {
    params.validate(gamma)?;
    let codec = SiteCodec::new(params.d)?;
    let n_hat = params.n_hat();
    let lambda = params.lambda(gamma);
    let eta = params.eta;
    let mut state: FxHashMap<u128, (f64, Option<usize>)> = FxHashMap::default();
    let mut crossings: Vec<Crossing> = Vec::new();
    let mut log_weight = 0.0;
    let mut key = codec.origin();
    let mut clock = 0.0;
    let mut max: f64 = 0.0;
    for i in 0..=n_hat {
        let entry = state.entry(key).or_insert((0.0, None));
        let hold = match entry.1 {
            Some(j) => {
                let c = &mut crossings[j];
                let cap = eta / 2f64.powi(c.holding_times.len() as i32 + 1);
                let h = rng.truncated_exp1(cap);
                log_weight += cap_log_mass(cap);
                c.returns += 1;
                c.holding_times.push(h);
                h
            }
            None => {
                let h = rng.exp1();
                if entry.0 <= lambda && entry.0 + h > lambda {
                    let cap = eta / 2.0;
                    let excess = rng.truncated_exp1(cap);
                    log_weight += cap_log_mass(cap);
                    entry.1 = Some(crossings.len());
                    crossings.push(Crossing {
                        site: codec.decode(key),
                        j: crossings.len() + 1,
                        returns: 0,
                        holding_times: vec![excess],
                    });
                    (lambda - entry.0) + excess
                } else {
                    h
                }
            }
        };
        entry.0 += hold;
        max = max.max(entry.0);
        clock += hold;
        if i < n_hat {
            key = codec.step(key, step_direction(rng, params.d));
        }
    }
    let in_b = crossings.iter().all(|c| c.within_caps(eta));
    Ok(WeightedSample {
        weight: log_weight.exp(),
        target_hit: max <= params.target(gamma),
        trace: ForcingTrace {
            lambda,
            eta,
            n_hat,
            crossings,
            in_b,
            final_key: key,
            window_time_bits: f64::to_bits(clock),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub reps: u64,
}

/// Mean weight over `reps` forced replicates; its expectation is `P(B)`.
pub fn weighted_b_sampler(params: &ForcingParams, gamma: f64, reps: u64, seed: u64) -> Result<Estimate> {
    params.validate(gamma)?;
    if reps < 2 {
        return Err(Error::config("reps must be at least 2"));
    }
    let weights = map_replicates(seed, 0..reps, |_, rng| weighted_replicate(params, gamma, rng).map(|s| s.weight));
    let mut acc = Accumulator::new();
    for w in weights {
        acc.push(w?);
    }
    let z = crate::stats::normal_quantile(0.5 + crate::deviation::CI_LEVEL / 2.0);
    let (value, stderr) = (acc.mean(), acc.stderr());
    Ok(Estimate {
        value,
        stderr,
        ci_lo: (value - z * stderr).max(0.0),
        ci_hi: (value + z * stderr).min(1.0),
        reps,
    })
}

/// Fraction of unforced replicates with `B`.
pub fn naive_b_probability(params: &ForcingParams, gamma: f64, reps: u64, seed: u64) -> Result<Estimate> {
    let traces = sample_traces(params, gamma, reps, seed)?;
    let hits = traces.iter().filter(|(t, _)| t.in_b).count() as u64;
    let p = hits as f64 / reps as f64;
    let (ci_lo, ci_hi) = wilson_interval(hits, reps, crate::deviation::CI_LEVEL)?;
    Ok(Estimate {
        value: p,
        stderr: (p * (1.0 - p) / reps as f64).sqrt(),
        ci_lo,
        ci_hi,
        reps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentParams {
    pub d: usize,
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub kappa: f64,
    pub n: u64,
}

impl SegmentParams {
    pub fn validate(&self) -> Result<()> {
        SiteCodec::new(self.d)?;
        let lower = 2.0 * self.beta1 / self.d as f64;
        if !(lower > 0.0 && lower < self.beta2 && self.beta2 < self.beta1 && self.beta1 < self.beta) {
            return Err(Error::config(format!(
                "need 0 < 2 beta1/d < beta2 < beta1 < beta, got beta1 = {}, beta2 = {}, beta = {}",
                self.beta1, self.beta2, self.beta
            )));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::config(format!("kappa = {} must lie in (0, 1)", self.kappa)));
        }
        if self.n < 2 {
            return Err(Error::config("n must be at least 2"));
        }
        Ok(())
    }

    pub fn n_hat(&self) -> u64 {
        (self.n as f64 + (self.n as f64).powf(self.kappa)).floor() as u64
    }

    /// `⌊n^{β_1}⌋`.
    pub fn block_length(&self) -> u64 {
        ((self.n as f64).powf(self.beta1).floor() as u64).max(1)
    }

    /// `K = ⌊n̂ / ⌊n^{β_1}⌋⌋ + 1`.
    pub fn blocks(&self) -> u64 {
        self.n_hat() / self.block_length() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentStats {
    pub block_length: u64,
    pub blocks: u64,
    /// `max_x #𝒥_x`.
    pub max: u64,
    /// `histogram[k]` sites are visited by exactly `k` blocks.
    pub histogram: Vec<u64>,
}

/// Number of blocks `I_j` visiting each site of `path[0..=n̂]`.
pub fn segment_visit_stats(path: &Path, params: &SegmentParams) -> Result<SegmentStats> {
    params.validate()?;
    let n_hat = params.n_hat();
    if (path.len() as u64) < n_hat + 1 {
        return Err(Error::input(format!("path has {} positions, need {}", path.len(), n_hat + 1)));
    }
    let len = params.block_length();
    let mut seen: FxHashMap<u128, (u64, u64)> = FxHashMap::default();
    for (s, &key) in path.keys().iter().enumerate().take(n_hat as usize + 1) {
        let block = s as u64 / len;
        let e = seen.entry(key).or_insert((u64::MAX, 0));
        if e.0 != block {
            e.0 = block;
            e.1 += 1;
        }
    }
    let max = seen.values().map(|v| v.1).max().unwrap_or(0);
    let mut histogram = vec![0u64; max as usize + 1];
    for v in seen.values() {
        histogram[v.1 as usize] += 1;
    }
    Ok(SegmentStats {
        block_length: len,
        blocks: params.blocks(),
        max,
        histogram,
    })
}

/// Segment statistics of `reps` discrete paths of `n̂` steps.
pub fn segment_experiment(params: &SegmentParams, reps: u64, seed: u64) -> Result<Vec<SegmentStats>> {
    params.validate()?;
    let codec = SiteCodec::new(params.d)?;
    let n_hat = params.n_hat();
    let out = map_replicates_with(
        seed,
        0..reps,
        || (LocalTimeField::new(Mode::Discrete, codec), Vec::new()),
        |(field, keys), r, _| -> Result<SegmentStats> {
            run_discrete_in(&WalkConfig::discrete(params.d, n_hat, seed, r), field, Some(keys))?;
            let path = Path::from_keys(codec, std::mem::take(keys));
            let stats = segment_visit_stats(&path, params);
            *keys = path.into_keys();
            stats
        },
    );
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditional_probability_examples() {
        assert_eq!(conditional_b_probability(&[], 0.3), 1.0);
        let half = conditional_b_probability(&[0], 2.0 * 2f64.ln());
        assert!((half - 0.5).abs() < 1e-15);
        let f = |x: f64| 1.0 - (-x).exp();
        let expect = f(0.5) * f(0.25) * f(0.5);
        assert!((conditional_b_probability(&[1, 0], 1.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn default_eta_satisfies_the_delta_constraint() {
        let p = ForcingParams::new(3, 0.9, 10_000);
        assert!(p.validate(0.659462670449).is_ok());
        let bad = ForcingParams { eta: 0.5, ..p };
        assert!(bad.validate(0.659462670449).is_err());
        let bad = ForcingParams { kappa: 0.5, ..p };
        assert!(bad.validate(0.659462670449).is_err());
    }
}
