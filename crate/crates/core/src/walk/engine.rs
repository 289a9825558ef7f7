//! Discrete and continuous-time simple random walk runs.
//!
//! A run with `(seed, replicate_index)` reads `Stream::new(seed,
//! replicate_index)` from its start. Continuous runs draw, at each skeleton
//! position, the holding time (one unit exponential) and then, if the clock
//! has not run out, the step. Jump-sampled runs use the same order, so the
//! first `n + 1` positions and holding times of a jump-sampled run coincide
//! with those of a continuous run with the same key.

use serde::{Deserialize, Serialize};

use super::field::{Compensated, LocalTimeField, Mode};
use super::site::{Path, Site, SiteCodec};
use crate::error::{Error, Result};
use crate::stats::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Steps(u64),
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub d: usize,
    pub horizon: Horizon,
    pub seed: u64,
    pub replicate_index: u64,
    pub record_path: bool,
}

impl WalkConfig {
    pub fn discrete(d: usize, n: u64, seed: u64, replicate_index: u64) -> Self {
        Self {
            d,
            horizon: Horizon::Steps(n),
            seed,
            replicate_index,
            record_path: false,
        }
    }

    pub fn continuous(d: usize, t: f64, seed: u64, replicate_index: u64) -> Self {
        Self {
            d,
            horizon: Horizon::Time(t),
            seed,
            replicate_index,
            record_path: false,
        }
    }

    pub fn with_path(mut self) -> Self {
        self.record_path = true;
        self
    }

    pub fn mode(&self) -> Mode {
        match self.horizon {
            Horizon::Steps(_) => Mode::Discrete,
            Horizon::Time(_) => Mode::Continuous,
        }
    }

    pub fn stream(&self) -> Stream {
        Stream::new(self.seed, self.replicate_index)
    }

    /// Checks the dimension and that the horizon cannot overflow a packed
    /// coordinate; returns the codec for the run.
    pub fn validate(&self) -> Result<SiteCodec> {
        let codec = SiteCodec::new(self.d)?;
        let limit = codec.coord_limit();
        match self.horizon {
            Horizon::Steps(n) if n > limit => Err(Error::config(format!(
                "step horizon {n} exceeds the step counter limit {limit} for d = {}",
                self.d
            ))),
            Horizon::Time(t) if !(t.is_finite() && t > 0.0) => {
                Err(Error::config(format!("time horizon t = {t} must be finite and > 0")))
            }
            Horizon::Time(t) if t > (limit / 2) as f64 => Err(Error::config(format!(
                "time horizon {t} exceeds the step counter limit {} for d = {}",
                limit / 2,
                self.d
            ))),
            _ => Ok(codec),
        }
    }
}

/// Direction index in `0..2d`; see [`SiteCodec::step`].
#[inline(always)]
pub fn step_direction(rng: &mut Stream, d: usize) -> usize {
    rng.below(2 * d as u32) as usize
}

/// One simple-random-walk increment `±e_i`.
pub fn uniform_step(rng: &mut Stream, d: usize) -> Site {
    let dir = step_direction(rng, d);
    Site::unit(d, dir / 2, if dir % 2 == 0 { 1 } else { -1 })
}

#[derive(Debug, Clone)]
pub struct DiscreteWalkResult {
    pub field: LocalTimeField,
    pub max_local_time: u64,
    pub final_site: Site,
    pub path: Option<Path>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteSummary {
    pub max_local_time: u64,
    pub final_key: u128,
}

/// Discrete run into a caller-owned field (reset first). Positions are
/// appended to `path` when given.
pub fn run_discrete_in(
    cfg: &WalkConfig,
    field: &mut LocalTimeField,
    mut path: Option<&mut Vec<u128>>,
) -> Result<DiscreteSummary> {
    let codec = cfg.validate()?;
    let n = match cfg.horizon {
        Horizon::Steps(n) => n,
        Horizon::Time(_) => return Err(Error::config("run_discrete needs a step horizon")),
    };
    field.reset(Mode::Discrete, codec);
    let mut rng = cfg.stream();
    let mut key = codec.origin();
    let mut max = field.add_visit(key);
    if let Some(p) = path.as_deref_mut() {
        p.clear();
        p.reserve(n as usize + 1);
        p.push(key);
    }
    for _ in 0..n {
        key = codec.step(key, step_direction(&mut rng, cfg.d));
        max = max.max(field.add_visit(key));
        if let Some(p) = path.as_deref_mut() {
            p.push(key);
        }
    }
    Ok(DiscreteSummary {
        max_local_time: max,
        final_key: key,
    })
}

pub fn run_discrete(cfg: &WalkConfig) -> Result<DiscreteWalkResult> {
    let codec = cfg.validate()?;
    let mut field = LocalTimeField::new(Mode::Discrete, codec);
    let mut keys = Vec::new();
    let s = run_discrete_in(cfg, &mut field, cfg.record_path.then_some(&mut keys))?;
    Ok(DiscreteWalkResult {
        field,
        max_local_time: s.max_local_time,
        final_site: codec.decode(s.final_key),
        path: cfg.record_path.then(|| Path::from_keys(codec, keys)),
    })
}

/// Skeleton positions with the time spent at each.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpChain {
    pub path: Path,
    pub holds: Vec<f64>,
}

impl JumpChain {
    pub fn new(codec: SiteCodec) -> Self {
        Self {
            path: Path::new(codec),
            holds: Vec::new(),
        }
    }

    fn clear(&mut self, codec: SiteCodec) {
        if *self.path.codec() != codec {
            self.path = Path::new(codec);
        }
        self.path.keys_mut().clear();
        self.holds.clear();
    }

    #[inline]
    fn push(&mut self, key: u128, hold: f64) {
        self.path.keys_mut().push(key);
        self.holds.push(hold);
    }

    pub fn len(&self) -> usize {
        self.holds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holds.is_empty()
    }

    /// Occupation field rebuilt from the chain, adding holds in order.
    pub fn field(&self) -> LocalTimeField {
        let mut f = LocalTimeField::new(Mode::Continuous, *self.path.codec());
        for (&k, &h) in self.path.keys().iter().zip(&self.holds) {
            f.add_time(k, h);
        }
        f
    }

    /// Visit counts of the skeleton positions.
    pub fn skeleton_field(&self) -> LocalTimeField {
        let mut f = LocalTimeField::new(Mode::Discrete, *self.path.codec());
        for &k in self.path.keys() {
            f.add_visit(k);
        }
        f
    }

    /// Cumulative times at which each hold ends.
    pub fn hold_end_times(&self) -> Vec<f64> {
        let mut c = Compensated::default();
        self.holds
            .iter()
            .map(|&h| {
                c.add(h);
                c.value()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ContinuousWalkResult {
    pub field: LocalTimeField,
    pub skeleton: DiscreteWalkResult,
    /// Times of the jumps that happen before the horizon.
    pub jump_times: Option<Vec<f64>>,
    /// Time spent at each skeleton position; the last one is cut at the horizon.
    pub holding_times: Option<Vec<f64>>,
    pub max_local_time: f64,
}

impl ContinuousWalkResult {
    pub fn jumps(&self) -> u64 {
        self.skeleton.field.total_count() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousSummary {
    pub max_local_time: f64,
    pub jumps: u64,
    pub final_key: u128,
}

/// Continuous run into caller-owned buffers. `skeleton`, if given, receives
/// the visit counts of the embedded jump chain; `chain` the positions and
/// (truncated) holding times.
pub fn run_continuous_in(
    cfg: &WalkConfig,
    field: &mut LocalTimeField,
    mut skeleton: Option<&mut LocalTimeField>,
    mut chain: Option<&mut JumpChain>,
) -> Result<ContinuousSummary> {
    let codec = cfg.validate()?;
    let t = match cfg.horizon {
        Horizon::Time(t) => t,
        Horizon::Steps(_) => return Err(Error::config("run_continuous needs a time horizon")),
    };
    let jump_limit = codec.coord_limit();
    field.reset(Mode::Continuous, codec);
    if let Some(s) = skeleton.as_deref_mut() {
        s.reset(Mode::Discrete, codec);
    }
    if let Some(c) = chain.as_deref_mut() {
        c.clear(codec);
    }
    let mut rng = cfg.stream();
    let mut key = codec.origin();
    let mut elapsed = Compensated::default();
    let mut jumps = 0u64;
    let mut max: f64 = 0.0;
    loop {
        let hold = rng.exp1();
        let remaining = t - elapsed.value();
        if remaining <= 0.0 {
            break;
        }
        let last = hold >= remaining;
        let dt = if last { remaining } else { hold };
        max = max.max(field.add_time(key, dt));
        if let Some(s) = skeleton.as_deref_mut() {
            s.add_visit(key);
        }
        if let Some(c) = chain.as_deref_mut() {
            c.push(key, dt);
        }
        if last {
            break;
        }
        elapsed.add(hold);
        key = codec.step(key, step_direction(&mut rng, cfg.d));
        jumps += 1;
        if jumps >= jump_limit {
            return Err(Error::config("continuous run exceeded the step counter limit"));
        }
    }
    Ok(ContinuousSummary {
        max_local_time: max,
        jumps,
        final_key: key,
    })
}

pub fn run_continuous(cfg: &WalkConfig) -> Result<ContinuousWalkResult> {
    let codec = cfg.validate()?;
    let mut field = LocalTimeField::new(Mode::Continuous, codec);
    let mut skel = LocalTimeField::new(Mode::Discrete, codec);
    let mut chain = JumpChain::new(codec);
    let s = run_continuous_in(
        cfg,
        &mut field,
        Some(&mut skel),
        cfg.record_path.then_some(&mut chain),
    )?;
    let (path, jump_times, holding_times) = if cfg.record_path {
        let mut ends = chain.hold_end_times();
        ends.pop();
        (Some(chain.path), Some(ends), Some(chain.holds))
    } else {
        (None, None, None)
    };
    let max_count = skel.max_count();
    Ok(ContinuousWalkResult {
        field,
        skeleton: DiscreteWalkResult {
            field: skel,
            max_local_time: max_count,
            final_site: codec.decode(s.final_key),
            path,
        },
        jump_times,
        holding_times,
        max_local_time: s.max_local_time,
    })
}

/// The first `n + 1` skeleton positions with their full holding times, that
/// is the walk up to the `(n + 1)`-th jump time.
pub fn sample_jump_chain_in(cfg: &WalkConfig, n: u64, chain: &mut JumpChain) -> Result<()> {
    let codec = SiteCodec::new(cfg.d)?;
    if n > codec.coord_limit() {
        return Err(Error::config(format!(
            "jump count {n} exceeds the step counter limit {}",
            codec.coord_limit()
        )));
    }
    chain.clear(codec);
    chain.holds.reserve(n as usize + 1);
    let mut rng = cfg.stream();
    let mut key = codec.origin();
    for k in 0..=n {
        chain.push(key, rng.exp1());
        if k < n {
            key = codec.step(key, step_direction(&mut rng, cfg.d));
        }
    }
    Ok(())
}

pub fn sample_jump_chain(cfg: &WalkConfig, n: u64) -> Result<JumpChain> {
    let mut chain = JumpChain::new(SiteCodec::new(cfg.d)?);
    sample_jump_chain_in(cfg, n, &mut chain)?;
    Ok(chain)
}

/// Local time frozen at the `(n + 1)`-th jump time.
pub fn run_jump_sampled(cfg: &WalkConfig, n: u64) -> Result<LocalTimeField> {
    Ok(sample_jump_chain(cfg, n)?.field())
}
