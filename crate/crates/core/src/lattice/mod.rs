//! Lattice constants: `G(0)`, the escape probability `γ_d`, the tail rate
//! `α_d = −1/log(1 − γ_d)`, hitting probabilities `t_y = G(y)/G(0)` and the
//! asymptotic constant of `t_y |y|^{d−2}`.

mod quadrature;

pub use quadrature::{gauss_legendre, green, green_adaptive, green_origin, Quadrature, Refinement};

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::replicate::accumulate_replicates;
use crate::walk::{count_target_visits, truncation_bias_bound, Site, MAX_DIM, MIN_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quadrature,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaAlpha {
    pub d: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub method: Method,
    /// Total error bound: quadrature estimate, or standard error plus the
    /// truncation bias bound for Monte Carlo.
    pub error_bound: f64,
    pub std_error: f64,
    pub bias_bound: f64,
}

/// `α = −1/log(1 − γ)`.
pub fn alpha_from_gamma(gamma: f64) -> f64 {
    -1.0 / (-gamma).ln_1p()
}

impl GammaAlpha {
    pub fn from_gamma(d: usize, gamma: f64, method: Method, error_bound: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::input(format!("escape probability {gamma} outside (0, 1)")));
        }
        Ok(Self {
            d,
            gamma,
            alpha: alpha_from_gamma(gamma),
            method,
            error_bound,
            std_error: 0.0,
            bias_bound: 0.0,
        })
    }

    /// `1 − γ`, the return probability.
    pub fn return_probability(&self) -> f64 {
        1.0 - self.gamma
    }
}

pub fn gamma_alpha(d: usize, refinement: Refinement) -> Result<GammaAlpha> {
    let g0 = green_origin(d, refinement)?;
    let gamma = 1.0 / g0.value;
    let err = g0.error_estimate / (g0.value * (g0.value - g0.error_estimate));
    GammaAlpha::from_gamma(d, gamma, Method::Quadrature, err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingProb {
    pub y: Vec<i64>,
    pub t_y: f64,
    pub error_bound: f64,
}

pub fn hitting_prob(y: &Site, refinement: Refinement) -> Result<HittingProb> {
    if y.is_origin() {
        return Err(Error::input("hitting probability needs y != 0"));
    }
    let g0 = green_origin(y.dim(), refinement)?;
    let gy = green(y.coords(), refinement)?;
    let t_y = gy.value / g0.value;
    let error_bound = (gy.error_estimate + t_y * g0.error_estimate) / (g0.value - g0.error_estimate);
    Ok(HittingProb {
        y: y.coords().to_vec(),
        t_y,
        error_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteRow {
    pub y: Vec<i64>,
    pub norm: f64,
    pub t_y: f64,
    /// `t_y · |y|^{d−2}`.
    pub scaled: f64,
    /// `|scaled − previous scaled|` (0 for the first row).
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteTable {
    pub d: usize,
    pub direction: Vec<i64>,
    pub rows: Vec<AsymptoteRow>,
    /// Richardson extrapolation in `1/|y|` from the two largest radii.
    pub extrapolated: f64,
    /// Larger of the last row step and the last extrapolation correction.
    pub spread: f64,
}

/// `t_{k·direction} |k·direction|^{d−2}` along increasing `k`.
pub fn hitting_asymptote(d: usize, direction: &[i64], radii: &[i64], refinement: Refinement) -> Result<AsymptoteTable> {
    let dir = Site::new(direction.to_vec())?;
    if dir.dim() != d || dir.is_origin() {
        return Err(Error::input("direction must be a nonzero site of dimension d"));
    }
    if radii.len() < 2 || radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] < 1 {
        return Err(Error::input("radii must be at least two increasing positive integers"));
    }
    let mut rows: Vec<AsymptoteRow> = Vec::with_capacity(radii.len());
    for &k in radii {
        let y = Site::new(direction.iter().map(|c| c * k).collect())?;
        let h = hitting_prob(&y, refinement)?;
        let norm = y.norm();
        let scaled = h.t_y * norm.powi(d as i32 - 2);
        let step = rows.last().map_or(0.0, |r| (scaled - r.scaled).abs());
        rows.push(AsymptoteRow {
            y: y.coords().to_vec(),
            norm,
            t_y: h.t_y,
            scaled,
            step,
        });
    }
    let richardson = |a: &AsymptoteRow, b: &AsymptoteRow| (b.norm * b.scaled - a.norm * a.scaled) / (b.norm - a.norm);
    let n = rows.len();
    let extrapolated = richardson(&rows[n - 2], &rows[n - 1]);
    let mut spread = (extrapolated - rows[n - 1].scaled).abs().max(rows[n - 1].step);
    if n >= 3 {
        spread = spread.max((extrapolated - richardson(&rows[n - 3], &rows[n - 2])).abs());
    }
    Ok(AsymptoteTable {
        d,
        direction: direction.to_vec(),
        rows,
        extrapolated,
        spread,
    })
}

/// Fraction of `reps` walks that do not return to the origin within
/// `horizon` steps.
pub fn gamma_mc(d: usize, horizon: u64, reps: u64, seed: u64) -> Result<GammaAlpha> {
    crate::walk::SiteCodec::new(d)?;
    if reps == 0 {
        return Err(Error::input("gamma_mc needs reps > 0"));
    }
    if horizon > 1 << 50 {
        return Err(Error::config(format!("horizon {horizon} is too large")));
    }
    let origin = [[0i64; MAX_DIM]];
    let acc = accumulate_replicates(seed, 0..reps, |_, rng| {
        let visits = count_target_visits(rng, d, &origin, horizon, true);
        if visits > 1 {
            0.0
        } else {
            1.0
        }
    });
    let gamma = acc.mean();
    let std_error = (gamma * (1.0 - gamma) / reps as f64).sqrt();
    let bias_bound = truncation_bias_bound(d, horizon);
    Ok(GammaAlpha {
        d,
        gamma,
        alpha: if gamma < 1.0 && gamma > 0.0 { alpha_from_gamma(gamma) } else { f64::NAN },
        method: Method::Mc,
        error_bound: std_error + bias_bound,
        std_error,
        bias_bound,
    })
}

/// Per-dimension constants, computed once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeConstants {
    pub d: usize,
    pub green_origin: f64,
    pub green_error: f64,
    pub gamma_alpha: GammaAlpha,
}

static CONSTANTS: [OnceLock<std::result::Result<LatticeConstants, String>>; MAX_DIM + 1] =
    [const { OnceLock::new() }; MAX_DIM + 1];

/// Cached constants for dimension `d`.
pub fn constants(d: usize) -> Result<&'static LatticeConstants> {
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(Error::config(format!(
            "dimension d = {d} must satisfy {MIN_DIM} <= d <= {MAX_DIM}"
        )));
    }
    let cell = CONSTANTS[d].get_or_init(|| {
        let start = if d <= 5 { 3 } else { 2 };
        let q = green_adaptive(&vec![0; d], start, 8, Refinement::default().tolerance).map_err(|e| e.to_string())?;
        let gamma = 1.0 / q.value;
        let err = q.error_estimate / (q.value * (q.value - q.error_estimate));
        let ga = GammaAlpha::from_gamma(d, gamma, Method::Quadrature, err).map_err(|e| e.to_string())?;
        Ok(LatticeConstants {
            d,
            green_origin: q.value,
            green_error: q.error_estimate,
            gamma_alpha: ga,
        })
    });
    cell.as_ref().map_err(|e| Error::InvalidInput(e.clone()))
}
