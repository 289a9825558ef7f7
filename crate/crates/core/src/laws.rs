//! Exact local-time laws, thresholds and the exceedance count `𝒩`.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::GammaAlpha;
use crate::replicate::map_replicates_with;
use crate::stats::{ks_distance_with_left, Accumulator};
use crate::walk::{run_discrete_in, DiscreteWalkResult, LocalTimeField, Mode, Path, SiteCodec, WalkConfig};

/// Threshold `βα log n + u` (discrete) or `βγ⁻¹ log t + u` (continuous).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSpec {
    pub beta: f64,
    pub u: f64,
    pub horizon: f64,
    pub mode: Mode,
}

impl ThresholdSpec {
    pub fn discrete(beta: f64, u: f64, n: u64) -> Self {
        Self {
            beta,
            u,
            horizon: n as f64,
            mode: Mode::Discrete,
        }
    }

    pub fn continuous(beta: f64, u: f64, t: f64) -> Self {
        Self {
            beta,
            u,
            horizon: t,
            mode: Mode::Continuous,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta = {} must be > 0", self.beta)));
        }
        if !(self.horizon > 1.0 && self.horizon.is_finite()) {
            return Err(Error::config(format!("horizon {} must be > 1", self.horizon)));
        }
        if !self.u.is_finite() {
            return Err(Error::config("u must be finite"));
        }
        Ok(())
    }

    /// The unrounded threshold.
    pub fn level(&self, ga: &GammaAlpha) -> Result<f64> {
        self.validate()?;
        let log = self.horizon.ln();
        Ok(match self.mode {
            Mode::Discrete => self.beta * ga.alpha * log + self.u,
            Mode::Continuous => self.beta / ga.gamma * log + self.u,
        })
    }

    fn require_discrete(&self) -> Result<()> {
        match self.mode {
            Mode::Discrete => Ok(()),
            Mode::Continuous => Err(Error::config("this quantity is defined for the discrete walk only")),
        }
    }
}

/// `m_n = ⌊βα log n + u⌋`; may be negative.
pub fn threshold_m(spec: &ThresholdSpec, ga: &GammaAlpha) -> Result<i64> {
    spec.require_discrete()?;
    Ok(spec.level(ga)?.floor() as i64)
}

/// `c = (1−γ)^{⌊x⌋ − x}` with `x = βα log n + u`.
pub fn c_factor(spec: &ThresholdSpec, ga: &GammaAlpha) -> Result<f64> {
    spec.require_discrete()?;
    let x = spec.level(ga)?;
    Ok(((x.floor() - x) * (-ga.gamma).ln_1p()).exp())
}

/// `n^β (1−γ)^{−u} (1−γ)^{⌊x⌋}` evaluated term by term.
pub fn c_factor_direct(spec: &ThresholdSpec, ga: &GammaAlpha) -> Result<f64> {
    spec.require_discrete()?;
    let x = spec.level(ga)?;
    let q = 1.0 - ga.gamma;
    Ok(spec.horizon.powf(spec.beta) * q.powf(-spec.u) * q.powf(x.floor()))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("gamma = {gamma} must lie in (0, 1)")))
    }
}

fn check_t_y(t_y: f64) -> Result<()> {
    if (0.0..1.0).contains(&t_y) {
        Ok(())
    } else {
        Err(Error::input(format!("t_y = {t_y} must lie in [0, 1)")))
    }
}

/// `P(ξ(∞,0) > m) = (1−γ)^m`.
pub fn tail_geometric_theory(m: u64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(GeometricLaw::new(gamma)?.tail(m as f64))
}

/// `P(ℓ(∞,0) > s) = e^{−γs}`.
pub fn tail_exponential_theory(s: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(s >= 0.0) {
        return Err(Error::input(format!("s = {s} must be >= 0")));
    }
    Ok((-gamma * s).exp())
}

/// `P(ξ(∞,0) + ξ(∞,y) > u) = (1 − γ/(1+t_y))^u`.
pub fn two_point_tail_theory(u: u64, t_y: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_t_y(t_y)?;
    Ok(GeometricLaw::new(gamma / (1.0 + t_y))?.tail(u as f64))
}

/// `P(ℓ(∞,0) + ℓ(∞,y) > s) = exp(−γs/(1+t_y))`.
pub fn two_point_tail_continuous(s: f64, t_y: f64, gamma: f64) -> Result<f64> {
    check_t_y(t_y)?;
    tail_exponential_theory(s, gamma / (1.0 + t_y))
}

/// A law given by its tails `P(X > x)` and `P(X ≥ x)`.
pub trait TailLaw: Sync {
    fn tail(&self, x: f64) -> f64;

    fn tail_closed(&self, x: f64) -> f64 {
        self.tail(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }
}

/// Geometric law on `{1, 2, ...}` with success probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricLaw {
    pub success: f64,
}

impl GeometricLaw {
    pub fn new(success: f64) -> Result<Self> {
        if success > 0.0 && success <= 1.0 {
            Ok(Self { success })
        } else {
            Err(Error::input(format!("success probability {success} outside (0, 1]")))
        }
    }
}

impl TailLaw for GeometricLaw {
    fn tail(&self, x: f64) -> f64 {
        if x < 1.0 {
            1.0
        } else {
            (x.floor() * (-self.success).ln_1p()).exp()
        }
    }

    fn tail_closed(&self, x: f64) -> f64 {
        if x <= 1.0 {
            1.0
        } else {
            ((x.ceil() - 1.0) * (-self.success).ln_1p()).exp()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialLaw {
    pub rate: f64,
}

impl ExponentialLaw {
    pub fn new(rate: f64) -> Result<Self> {
        if rate > 0.0 && rate.is_finite() {
            Ok(Self { rate })
        } else {
            Err(Error::input(format!("rate {rate} must be positive")))
        }
    }
}

impl TailLaw for ExponentialLaw {
    fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub level: f64,
    /// Empirical `P(X > level)`.
    pub empirical: f64,
    pub stderr: f64,
    pub theory: f64,
    /// `(empirical − theory)` over the standard error under the theory.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawCheckReport {
    pub samples: u64,
    pub levels: Vec<LevelRow>,
    pub ks_distance: f64,
    pub max_abs_z: f64,
    /// Fewer than 1000 samples.
    pub underpowered: bool,
}

impl LawCheckReport {
    pub fn passes(&self, z_limit: f64) -> bool {
        self.max_abs_z <= z_limit
    }
}

pub const Z_THRESHOLD: f64 = 5.0;

/// Per-level tail comparison and KS distance of `samples` against `law`.
pub fn empirical_law_check<L: TailLaw + ?Sized>(samples: &[f64], law: &L, levels: &[f64]) -> Result<LawCheckReport> {
    if samples.is_empty() {
        return Err(Error::input("empirical_law_check needs samples"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::input("samples contain NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let rows: Vec<LevelRow> = levels
        .iter()
        .map(|&level| {
            let above = sorted.len() - sorted.partition_point(|&x| x <= level);
            let p = above as f64 / n;
            let theory = law.tail(level);
            let var0 = (theory * (1.0 - theory)).max(1.0 / n);
            LevelRow {
                level,
                empirical: p,
                stderr: (p * (1.0 - p) / n).sqrt(),
                theory,
                z: (p - theory) / (var0 / n).sqrt(),
            }
        })
        .collect();
    let ks_distance = ks_distance_with_left(&sorted, |x| law.cdf(x), |x| 1.0 - law.tail_closed(x))?;
    Ok(LawCheckReport {
        samples: sorted.len() as u64,
        max_abs_z: rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max),
        levels: rows,
        ks_distance,
        underpowered: sorted.len() < 1000,
    })
}

fn require_discrete(field: &LocalTimeField) -> Result<()> {
    match field.mode() {
        Mode::Discrete => Ok(()),
        Mode::Continuous => Err(Error::input("exceedance counts need a discrete field")),
    }
}

/// `𝒩 = #{x : ξ(n,x) > m}`.
pub fn count_exceedances(field: &LocalTimeField, m: u64) -> Result<u64> {
    require_discrete(field)?;
    Ok(field.iter_counts().filter(|&(_, c)| c > m).count() as u64)
}

/// `Σ_j 1{ξ([j,n], S_j) = m+1}` by one backward sweep over the path.
pub fn count_path_representation(path: &Path, m: u64) -> u64 {
    let mut forward: FxHashMap<u128, u64> = FxHashMap::default();
    let mut count = 0;
    for &k in path.keys().iter().rev() {
        let c = forward.entry(k).or_insert(0);
        *c += 1;
        if *c == m + 1 {
            count += 1;
        }
    }
    count
}

/// [`count_path_representation`] on a run recorded with its path.
pub fn count_via_representation(run: &DiscreteWalkResult, m: u64) -> Result<u64> {
    let path = run
        .path
        .as_ref()
        .ok_or_else(|| Error::input("count_via_representation needs a recorded path"))?;
    Ok(count_path_representation(path, m))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub n: u64,
    pub m: i64,
    pub reps: u64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub second_moment: f64,
    pub second_moment_stderr: f64,
    /// `γ n (1−γ)^m = c γ (1−γ)^u n^{1−β}`.
    pub theory: f64,
    pub ratio: f64,
    /// `E[𝒩²] / E[𝒩]`.
    pub second_to_first: f64,
    /// Fraction of replicates with `𝒩 ≥ 1`.
    pub positive_fraction: f64,
}

impl MomentRow {
    /// Row from accumulators of `𝒩`, `𝒩²` and the indicator `𝒩 > 0`.
    pub fn from_accumulators(
        n: u64,
        m: i64,
        first: &Accumulator,
        second: &Accumulator,
        positive: &Accumulator,
        gamma: f64,
    ) -> Result<Self> {
        let reps = first.count();
        if reps == 0 || second.count() != reps || positive.count() != reps {
            return Err(Error::AccumulatorMismatch(format!(
                "moment accumulators hold {}, {} and {} values",
                reps,
                second.count(),
                positive.count()
            )));
        }
        let theory = mean_count_theory(n, m, gamma);
        Ok(MomentRow {
            n,
            m,
            reps,
            mean: first.mean(),
            mean_stderr: first.stderr(),
            second_moment: second.mean(),
            second_moment_stderr: second.stderr(),
            theory,
            ratio: first.mean() / theory,
            second_to_first: if first.mean() > 0.0 { second.mean() / first.mean() } else { f64::NAN },
            positive_fraction: positive.mean(),
        })
    }
}

/// `γ n (1−γ)^m`, zero once `m ≥ n+1`.
pub fn mean_count_theory(n: u64, m: i64, gamma: f64) -> f64 {
    if m >= 0 && m as u64 > n {
        return 0.0;
    }
    gamma * n as f64 * (m as f64 * (-gamma).ln_1p()).exp()
}

/// Per-replicate exceedance counts `𝒩` of `reps` discrete walks.
pub fn sample_counts(d: usize, n: u64, m: i64, reps: u64, seed: u64) -> Result<Vec<u64>> {
    let codec = SiteCodec::new(d)?;
    WalkConfig::discrete(d, n, seed, 0).validate()?;
    let m = m.max(-1);
    let out = map_replicates_with(
        seed,
        0..reps,
        || LocalTimeField::new(Mode::Discrete, codec),
        |field, r, _| -> Result<u64> {
            run_discrete_in(&WalkConfig::discrete(d, n, seed, r), field, None)?;
            Ok(if m < 0 {
                field.len() as u64
            } else {
                field.iter_counts().filter(|&(_, c)| c > m as u64).count() as u64
            })
        },
    );
    out.into_iter().collect()
}

/// Empirical first and second moments of `𝒩` against `γ n (1−γ)^m` for
/// each horizon of the ladder.
pub fn moment_report(
    d: usize,
    beta: f64,
    u: f64,
    ladder: &[u64],
    reps: u64,
    seed: u64,
    ga: &GammaAlpha,
) -> Result<Vec<MomentRow>> {
    if !(beta > 1.0) {
        return Err(Error::config(format!("moment_report needs beta > 1, got {beta}")));
    }
    if reps == 0 {
        return Err(Error::config("reps must be positive"));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for (i, &n) in ladder.iter().enumerate() {
        let spec = ThresholdSpec::discrete(beta, u, n);
        let m = threshold_m(&spec, ga)?;
        let counts = sample_counts(d, n, m, reps, seed.wrapping_add(i as u64))?;
        let (mut first, mut second, mut positive) = (Accumulator::new(), Accumulator::new(), Accumulator::new());
        for &c in &counts {
            first.push(c as f64);
            second.push((c * c) as f64);
            positive.push(f64::from(u8::from(c > 0)));
        }
        rows.push(MomentRow::from_accumulators(n, m, &first, &second, &positive, ga.gamma)?);
    }
    Ok(rows)
}
