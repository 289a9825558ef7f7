//! Visit counts at one or two target sites over a long step budget.
//!
//! From a position at L1 distance `r ≥ 2` from every target the walk cannot
//! hit a target within `r − 1` steps, so those steps are taken at once by
//! drawing the exact multinomial displacement. The sequence of draws does
//! not depend on the budget, so for a fixed key the visit count is
//! nondecreasing in the truncation.

use super::engine::{step_direction, WalkConfig};
use super::field::Mode;
use super::site::{check_dim, Site, MAX_DIM};
use crate::error::{Error, Result};
use crate::stats::Stream;

/// Leaps shorter than this are taken as single steps.
const MIN_LEAP: u64 = 12;

type Coords = [i64; MAX_DIM];

/// Adds the displacement of `k` simple-random-walk steps to `x`.
fn leap(rng: &mut Stream, d: usize, k: u64, x: &mut Coords) {
    let mut rem = k;
    for i in 0..d {
        let n_i = if i + 1 == d {
            rem
        } else {
            rng.binomial(rem, 1.0 / (d - i) as f64)
        };
        rem -= n_i;
        let plus = rng.binomial(n_i, 0.5);
        x[i] += 2 * plus as i64 - n_i as i64;
    }
}

fn l1_to(x: &Coords, y: &Coords, d: usize) -> u64 {
    (0..d).map(|i| (x[i] - y[i]).unsigned_abs()).sum()
}

/// Counts the times `0 ≤ s ≤ budget` with `S_s` in `targets`. With
/// `first_return` the count stops at the first visit after time 0.
pub fn count_target_visits(
    rng: &mut Stream,
    d: usize,
    targets: &[Coords],
    budget: u64,
    first_return: bool,
) -> u64 {
    let mut x: Coords = [0; MAX_DIM];
    let mut time = 0u64;
    let mut visits = u64::from(targets.iter().any(|t| l1_to(&x, t, d) == 0));
    while time < budget {
        let r = targets.iter().map(|t| l1_to(&x, t, d)).min().unwrap_or(u64::MAX);
        if r > MIN_LEAP {
            leap(rng, d, r - 1, &mut x);
            time += r - 1;
            continue;
        }
        let dir = step_direction(rng, d);
        x[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        time += 1;
        if time <= budget && targets.iter().any(|t| l1_to(&x, t, d) == 0) {
            visits += 1;
            if first_return {
                break;
            }
        }
    }
    visits
}

/// Upper estimate of the expected number of visits to the origin after step
/// `m`, `1.1 · (d/2π)^{d/2} m^{1−d/2} / (d/2 − 1)`, from the local limit
/// theorem. Bounds the truncation bias of every origin-based sample.
pub fn truncation_bias_bound(d: usize, m: u64) -> f64 {
    let h = d as f64 / 2.0;
    let m = (m.max(1)) as f64;
    1.1 * (d as f64 / (2.0 * std::f64::consts::PI)).powf(h) * m.powf(1.0 - h) / (h - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimeSample {
    /// Visits to the targets at times `0..=truncation`.
    pub visits: u64,
    /// The sample in the configured mode: `visits` (discrete) or the sum of
    /// that many unit exponentials (continuous).
    pub value: f64,
    pub bias_bound: f64,
}

fn sample_targets(cfg: &WalkConfig, targets: &[Coords], truncation: u64) -> Result<LocalTimeSample> {
    check_dim(cfg.d)?;
    if truncation > (1 << 50) {
        return Err(Error::config(format!("truncation {truncation} is too large")));
    }
    let mut rng = cfg.stream();
    let visits = count_target_visits(&mut rng, cfg.d, targets, truncation, false);
    let value = match cfg.mode() {
        Mode::Discrete => visits as f64,
        Mode::Continuous => (0..visits).map(|_| rng.exp1()).sum(),
    };
    Ok(LocalTimeSample {
        visits,
        value,
        bias_bound: targets.len() as f64 * truncation_bias_bound(cfg.d, truncation),
    })
}

/// Truncated sample of the total local time at the origin. The mode follows
/// the horizon kind of `cfg`; the horizon value itself is not used.
pub fn origin_local_time_sample(cfg: &WalkConfig, truncation: u64) -> Result<LocalTimeSample> {
    sample_targets(cfg, &[[0; MAX_DIM]], truncation)
}

/// Truncated sample of the summed local times at the origin and at `y`.
pub fn two_point_local_time_sample(cfg: &WalkConfig, y: &Site, truncation: u64) -> Result<LocalTimeSample> {
    if y.dim() != cfg.d {
        return Err(Error::input(format!("site {y} is not in dimension {}", cfg.d)));
    }
    if y.is_origin() {
        return Err(Error::input("the second site must differ from the origin"));
    }
    let mut t: Coords = [0; MAX_DIM];
    t[..cfg.d].copy_from_slice(y.coords());
    sample_targets(cfg, &[[0; MAX_DIM], t], truncation)
}
