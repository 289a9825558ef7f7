//! Upward and downward deviations of the maximum local time, moderate
//! deviations, the block-product bound and Gumbel fluctuations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::GammaAlpha;
use crate::laws::{c_factor, mean_count_theory, threshold_m, ThresholdSpec};
use crate::replicate::map_replicates_with;
use crate::stats::{ks_distance, wilson_interval, Stream};
use crate::walk::{run_continuous_in, run_discrete_in, LocalTimeField, Mode, SiteCodec, WalkConfig};

/// Confidence level of every reported interval.
pub const CI_LEVEL: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    /// Whether a maximum counts as a success: `max > level` up,
    /// `max ≤ level` down.
    pub fn hit(self, max: f64, level: f64) -> bool {
        match self {
            Direction::Up => max > level,
            Direction::Down => max <= level,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailQuery {
    pub d: usize,
    pub mode: Mode,
    pub direction: Direction,
    pub beta: f64,
    pub u: f64,
    pub horizon: f64,
    pub reps: u64,
    pub seed: u64,
}

impl TailQuery {
    pub fn spec(&self) -> ThresholdSpec {
        ThresholdSpec {
            beta: self.beta,
            u: self.u,
            horizon: self.horizon,
            mode: self.mode,
        }
    }

    /// True for the boundary `β = 1` of the upward regime.
    pub fn validate(&self) -> Result<bool> {
        SiteCodec::new(self.d)?;
        self.spec().validate()?;
        if self.mode == Mode::Discrete && self.horizon.fract() != 0.0 {
            return Err(Error::config("discrete horizon must be an integer"));
        }
        if self.reps == 0 {
            return Err(Error::config("reps must be positive"));
        }
        match self.direction {
            Direction::Up if self.beta < 1.0 => Err(Error::config(format!(
                "upward deviations need beta > 1, got {}",
                self.beta
            ))),
            Direction::Up => Ok(self.beta == 1.0),
            Direction::Down if self.beta > 1.0 => Err(Error::config(format!(
                "downward deviations need 0 < beta <= 1, got {}",
                self.beta
            ))),
            Direction::Down => Ok(false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpwardTheory {
    pub value: f64,
    pub out_of_range: bool,
}

/// `γ e^{−γu} t^{−(β−1)}` or `γ n (1−γ)^{⌊βα log n + u⌋}`.
pub fn upward_tail_theory(query: &TailQuery, ga: &GammaAlpha) -> Result<UpwardTheory> {
    if query.direction != Direction::Up {
        return Err(Error::config("upward theory needs direction up"));
    }
    let out_of_range = query.validate()?;
    let g = ga.gamma;
    let value = match query.mode {
        Mode::Continuous => (g.ln() - g * query.u - (query.beta - 1.0) * query.horizon.ln()).exp(),
        Mode::Discrete => {
            let m = threshold_m(&query.spec(), ga)?;
            mean_count_theory(query.horizon as u64, m, g)
        }
    };
    Ok(UpwardTheory { value, out_of_range })
}

/// `c γ (1−γ)^u n^{1−β}`, the rewritten discrete upward asymptote.
pub fn upward_tail_c_form(query: &TailQuery, ga: &GammaAlpha) -> Result<f64> {
    let c = c_factor(&query.spec(), ga)?;
    let g = ga.gamma;
    Ok(c * g * (1.0 - g).powf(query.u) * query.horizon.powf(1.0 - query.beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DownwardTheory {
    pub exponent: f64,
    pub probability: f64,
}

/// Exponent `γ e^{−γu} t^{1−β}` or `c γ (1−γ)^u n^{1−β}` and `e^{−E}`.
pub fn downward_tail_theory(query: &TailQuery, ga: &GammaAlpha) -> Result<DownwardTheory> {
    if query.direction != Direction::Down {
        return Err(Error::config("downward theory needs direction down"));
    }
    query.validate()?;
    let g = ga.gamma;
    let exponent = match query.mode {
        Mode::Continuous => (g.ln() - g * query.u + (1.0 - query.beta) * query.horizon.ln()).exp(),
        Mode::Discrete => {
            let m = threshold_m(&query.spec(), ga)?;
            mean_count_theory(query.horizon as u64, m, g)
        }
    };
    Ok(DownwardTheory {
        exponent,
        probability: (-exponent).exp(),
    })
}

/// Leading moderate-deviation forms at offset `a` from the typical scale.
/// Upward: a probability. Downward: `exp(−E)` with `E` as in
/// [`moderate_downward_exponent`].
pub fn moderate_tail_theory(mode: Mode, direction: Direction, a: f64, horizon: f64, ga: &GammaAlpha) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::input(format!("offset a = {a} must be >= 0")));
    }
    let g = ga.gamma;
    Ok(match direction {
        Direction::Up => match mode {
            Mode::Continuous => g * (-g * a).exp(),
            Mode::Discrete => moderate_discrete(a, horizon, ga)?,
        },
        Direction::Down => (-moderate_downward_exponent(mode, a, horizon, ga)?).exp(),
    })
}

/// `γ e^{γa}` (continuous) or `γ n (1−γ)^{⌊α log n − a⌋}` (discrete).
pub fn moderate_downward_exponent(mode: Mode, a: f64, horizon: f64, ga: &GammaAlpha) -> Result<f64> {
    let g = ga.gamma;
    Ok(match mode {
        Mode::Continuous => g * (g * a).exp(),
        Mode::Discrete => moderate_discrete(-a, horizon, ga)?,
    })
}

fn moderate_discrete(shift: f64, n: f64, ga: &GammaAlpha) -> Result<f64> {
    if !(n > 1.0) || n.fract() != 0.0 {
        return Err(Error::input("discrete moderate forms need an integer horizon n > 1"));
    }
    let m = (ga.alpha * n.ln() + shift).floor() as i64;
    Ok(mean_count_theory(n as u64, m, ga.gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub query: TailQuery,
    /// The threshold the maximum is compared with.
    pub level: f64,
    pub successes: u64,
    pub empirical: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Upward: the asymptotic probability. Downward: `e^{−E}`.
    pub theory: f64,
    /// Downward only.
    pub exponent: Option<f64>,
    pub ratio: f64,
    /// Downward only: `−log(empirical) / E`.
    pub log_ratio: Option<f64>,
    pub stderr: f64,
    pub underpowered: bool,
    pub out_of_range: bool,
}

/// Per-replicate maxima `ξ*(n)` or `ℓ*(t)`.
pub fn sample_maxima(d: usize, mode: Mode, horizon: f64, reps: u64, seed: u64) -> Result<Vec<f64>> {
    let codec = SiteCodec::new(d)?;
    let cfg_of = |r: u64| match mode {
        Mode::Discrete => WalkConfig::discrete(d, horizon as u64, seed, r),
        Mode::Continuous => WalkConfig::continuous(d, horizon, seed, r),
    };
    cfg_of(0).validate()?;
    let out = map_replicates_with(
        seed,
        0..reps,
        || LocalTimeField::new(mode, codec),
        |field, r, _| -> Result<f64> {
            let cfg = cfg_of(r);
            Ok(match mode {
                Mode::Discrete => run_discrete_in(&cfg, field, None)?.max_local_time as f64,
                Mode::Continuous => run_continuous_in(&cfg, field, None, None)?.max_local_time,
            })
        },
    );
    out.into_iter().collect()
}

/// Monte Carlo estimate of `P(max > level)` (up) or `P(max ≤ level)` (down)
/// with a Wilson interval and the asymptotic comparison.
pub fn tail_mc(query: &TailQuery, ga: &GammaAlpha) -> Result<TailReport> {
    query.validate()?;
    let level = query.spec().level(ga)?;
    let maxima = sample_maxima(query.d, query.mode, query.horizon, query.reps, query.seed)?;
    let successes = maxima.iter().filter(|&&x| query.direction.hit(x, level)).count() as u64;
    tail_report(query, ga, successes)
}

/// The report for `successes` out of `query.reps` replicates.
pub fn tail_report(query: &TailQuery, ga: &GammaAlpha, successes: u64) -> Result<TailReport> {
    let out_of_range = query.validate()?;
    let level = query.spec().level(ga)?;
    let reps = query.reps;
    if successes > reps {
        return Err(Error::input(format!("{successes} successes out of {reps} replicates")));
    }
    let p = successes as f64 / reps as f64;
    let (ci_lo, ci_hi) = wilson_interval(successes, reps, CI_LEVEL)?;
    let (theory, exponent) = match query.direction {
        Direction::Up => (upward_tail_theory(query, ga)?.value, None),
        Direction::Down => {
            let t = downward_tail_theory(query, ga)?;
            (t.probability, Some(t.exponent))
        }
    };
    let underpowered = reps < 1000 || (query.direction == Direction::Up && theory < 10.0 / reps as f64);
    Ok(TailReport {
        query: *query,
        level,
        successes,
        empirical: p,
        ci_lo,
        ci_hi,
        theory,
        exponent,
        ratio: p / theory,
        log_ratio: exponent.map(|e| -p.ln() / e),
        stderr: (p * (1.0 - p) / reps as f64).sqrt(),
        underpowered,
        out_of_range,
    })
}

/// `exp(−γ e^{−γu})`.
pub fn gumbel_reference_cdf(u: f64, gamma: f64) -> f64 {
    (-gamma * (-gamma * u).exp()).exp()
}

/// One draw from the law with CDF [`gumbel_reference_cdf`].
pub fn gumbel_sample(rng: &mut Stream, gamma: f64) -> f64 {
    -(-rng.open01().ln() / gamma).ln() / gamma
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GumbelRow {
    pub t: f64,
    pub reps: u64,
    pub ks_distance: f64,
    /// Mean of `ℓ*(t) − γ⁻¹ log t`.
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GumbelFit {
    pub rows: Vec<GumbelRow>,
    pub ks_nonincreasing: bool,
    /// Centred samples of the last horizon, sorted.
    pub last_samples: Vec<f64>,
}

/// Centred maxima `ℓ*(t) − γ⁻¹ log t`.
pub fn centred_maxima(d: usize, t: f64, reps: u64, seed: u64, gamma: f64) -> Result<Vec<f64>> {
    let shift = t.ln() / gamma;
    Ok(sample_maxima(d, Mode::Continuous, t, reps, seed)?
        .into_iter()
        .map(|x| x - shift)
        .collect())
}

pub fn gumbel_fit(d: usize, ladder: &[f64], reps: u64, seed: u64, ga: &GammaAlpha) -> Result<GumbelFit> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("the horizon ladder must be nonempty and increasing"));
    }
    if !(ladder[0] > 1.0) {
        return Err(Error::config("horizons must exceed 1"));
    }
    if reps == 0 {
        return Err(Error::config("reps must be positive"));
    }
    let g = ga.gamma;
    let mut rows = Vec::with_capacity(ladder.len());
    let mut last = Vec::new();
    for (i, &t) in ladder.iter().enumerate() {
        let mut samples = centred_maxima(d, t, reps, seed.wrapping_add(i as u64), g)?;
        let ks = ks_distance(&samples, |u| gumbel_reference_cdf(u, g))?;
        rows.push(GumbelRow {
            t,
            reps,
            ks_distance: ks,
            mean: samples.iter().sum::<f64>() / reps as f64,
        });
        samples.sort_by(f64::total_cmp);
        last = samples;
    }
    Ok(GumbelFit {
        ks_nonincreasing: rows.windows(2).all(|w| w[1].ks_distance <= w[0].ks_distance),
        rows,
        last_samples: last,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockBound {
    pub blocks: u64,
    pub block_length: f64,
    pub one_block: f64,
    pub one_block_stderr: f64,
    /// `one_block^blocks`.
    pub bound: f64,
    pub bound_stderr: f64,
    /// The one-block estimate is 0.
    pub degenerate: bool,
}

fn check_block_params(beta: f64, beta_prime: f64, t: f64) -> Result<()> {
    if !(beta_prime > 0.0 && beta_prime <= beta && beta <= 1.0) {
        return Err(Error::config(format!(
            "block bound needs 0 < beta' <= beta <= 1, got beta = {beta}, beta' = {beta_prime}"
        )));
    }
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::config("horizon t must exceed 1"));
    }
    Ok(())
}

/// Product bound from `successes` of `reps` one-block replicates.
pub fn block_product_bound(beta: f64, beta_prime: f64, t: f64, successes: u64, reps: u64) -> Result<BlockBound> {
    check_block_params(beta, beta_prime, t)?;
    if reps == 0 || successes > reps {
        return Err(Error::input("need 0 <= successes <= reps and reps > 0"));
    }
    let blocks = (t.powf(1.0 - beta_prime).floor() as u64).max(1);
    let p = successes as f64 / reps as f64;
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    let k = blocks as f64;
    let bound = p.powf(k);
    Ok(BlockBound {
        blocks,
        block_length: t.powf(beta_prime),
        one_block: p,
        one_block_stderr: se,
        bound,
        bound_stderr: if blocks == 1 { se } else { k * p.powf(k - 1.0) * se },
        degenerate: successes == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockComparison {
    pub bound: BlockBound,
    pub direct: TailReport,
    pub combined_stderr: f64,
    /// `direct ≤ bound + 2 · combined_stderr`.
    pub holds: bool,
}

/// Direct downward estimate at horizon `t` against the product bound from
/// blocks of length `t^{β'}` (continuous walk).
#[allow(clippy::too_many_arguments)]
pub fn block_bound_check(
    d: usize,
    beta: f64,
    beta_prime: f64,
    t: f64,
    u: f64,
    reps: u64,
    seed: u64,
    ga: &GammaAlpha,
) -> Result<BlockComparison> {
    check_block_params(beta, beta_prime, t)?;
    let query = TailQuery {
        d,
        mode: Mode::Continuous,
        direction: Direction::Down,
        beta,
        u,
        horizon: t,
        reps,
        seed,
    };
    let direct = tail_mc(&query, ga)?;
    let block_length = t.powf(beta_prime);
    let block_max = sample_maxima(d, Mode::Continuous, block_length, reps, seed)?;
    let successes = block_max.iter().filter(|&&x| x <= direct.level).count() as u64;
    let bound = block_product_bound(beta, beta_prime, t, successes, reps)?;
    let combined_stderr = (direct.stderr.powi(2) + bound.bound_stderr.powi(2)).sqrt();
    Ok(BlockComparison {
        holds: direct.empirical <= bound.bound + 2.0 * combined_stderr,
        bound,
        direct,
        combined_stderr,
    })
}
