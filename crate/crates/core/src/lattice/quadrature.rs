//! Lattice Green's function by singularity-aware quadrature.
//!
//! `G(y) = (2π)^{-d} ∫ cos⟨θ, y⟩ / (1 − φ(θ)) dθ` over `[−π, π]^d`, with
//! `φ(θ) = (1/d) Σ cos θ_i`. The coordinate `p` with the largest `|y_p| = m`
//! is integrated in closed form,
//!
//! `∫_{−π}^{π} cos(mθ) / (A − B cos θ) dθ = 2π ρ^m / √(A² − B²)`,
//! `A = 1 − (1/d) Σ_{i≠p} cos θ_i`, `B = 1/d`, `ρ = B / (A + √(A² − B²))`,
//!
//! leaving a `(d−1)`-dimensional integral over `[0, π]^{d−1}` whose only
//! singularity is a `1/|θ|` point singularity at the origin. A Duffy
//! transform (`θ_q = s` for the largest coordinate, `θ_i = s·v_i` for the
//! others) cancels it, and the remaining analytic integrand is handled by
//! composite Gauss–Legendre rules, graded geometrically towards `s = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite rule on the given breakpoints.
fn composite(breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let mut out = Vec::with_capacity((breaks.len() - 1) * n);
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&w) {
            out.push((c + h * xi, h * wi));
        }
    }
    out
}

/// Discretisation parameters of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Grid {
    nodes: usize,
    s_levels: usize,
    v_panels: usize,
}

fn grid(level: u32, d: usize, max_other: i64, m: i64) -> Grid {
    let l = level as usize;
    let base = match d {
        3 => 8,
        4 => 6,
        _ => 4,
    };
    let nodes = base + 2 * l;
    let s_levels = 2 + l + (m.max(1) as f64).log2().ceil() as usize;
    let v_panels = 1 + (max_other as usize) / 4 + l / 3;
    Grid {
        nodes,
        s_levels,
        v_panels,
    }
}

#[inline]
fn kernel(theta: &[f64], ys: &[i64], m: i32, inv_d: f64) -> f64 {
    let mut sin2 = 0.0;
    let mut num = 1.0;
    for (t, &y) in theta.iter().zip(ys) {
        let h = (0.5 * t).sin();
        sin2 += h * h;
        if y != 0 {
            num *= (y as f64 * t).cos();
        }
    }
    let b = inv_d;
    let a_minus_b = 2.0 * inv_d * sin2;
    let a = b + a_minus_b;
    let root = (a_minus_b * (a + b)).sqrt();
    let rho = b / (a + root);
    num * rho.powi(m) / root
}

fn integrate_level(y: &[i64], level: u32) -> f64 {
    let d = y.len();
    let abs: Vec<i64> = y.iter().map(|c| c.abs()).collect();
    let p = (0..d).max_by_key(|&i| (abs[i], std::cmp::Reverse(i))).unwrap();
    let m = abs[p];
    let others: Vec<i64> = (0..d).filter(|&i| i != p).map(|i| abs[i]).collect();
    let k = d - 1;
    let max_other = others.iter().copied().max().unwrap_or(0);
    let g = grid(level, d, max_other, m);

    let ratio: f64 = 0.25;
    let mut sb: Vec<f64> = (0..=g.s_levels).map(|j| PI * ratio.powi((g.s_levels - j) as i32)).collect();
    sb.insert(0, 0.0);
    let s_rule = composite(&sb, g.nodes);
    let vb: Vec<f64> = (0..=g.v_panels).map(|j| j as f64 / g.v_panels as f64).collect();
    let v_rule = composite(&vb, g.nodes);

    let inv_d = 1.0 / d as f64;
    let mut theta = vec![0.0; k];
    let mut idx = vec![0usize; k.saturating_sub(1)];
    let mut total = 0.0;
    for q in 0..k {
        // pyramid where coordinate q is the largest
        let mut ys = Vec::with_capacity(k);
        ys.push(others[q]);
        ys.extend((0..k).filter(|&i| i != q).map(|i| others[i]));
        let mut pyramid = 0.0;
        for &(s, ws) in &s_rule {
            let jac = s.powi(k as i32 - 1);
            theta[0] = s;
            idx.iter_mut().for_each(|i| *i = 0);
            let mut inner = 0.0;
            loop {
                let mut w = 1.0;
                for (j, &ix) in idx.iter().enumerate() {
                    let (v, wv) = v_rule[ix];
                    theta[j + 1] = s * v;
                    w *= wv;
                }
                inner += w * kernel(&theta, &ys, m as i32, inv_d);
                // odometer
                let mut j = 0;
                while j < idx.len() {
                    idx[j] += 1;
                    if idx[j] < v_rule.len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == idx.len() {
                    break;
                }
            }
            pyramid += ws * jac * inner;
        }
        total += pyramid;
    }
    total / PI.powi(k as i32)
}

/// A quadrature value with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// `|I_L − I_{L−1}|`.
    pub error_estimate: f64,
    pub level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub level: u32,
    /// Absolute error the result must certify.
    pub tolerance: f64,
}

impl Default for Refinement {
    fn default() -> Self {
        Self {
            level: 4,
            tolerance: 1e-6,
        }
    }
}

impl Refinement {
    pub fn level(level: u32) -> Self {
        Self {
            level,
            ..Self::default()
        }
    }
}

/// `G(y)` at one refinement level; fails when the error estimate exceeds
/// the tolerance.
pub fn green(y: &[i64], refinement: Refinement) -> Result<Quadrature> {
    crate::walk::Site::new(y.to_vec())?;
    if refinement.level == 0 {
        return Err(Error::config("quadrature refinement level must be at least 1"));
    }
    let fine = integrate_level(y, refinement.level);
    let coarse = integrate_level(y, refinement.level - 1);
    let q = Quadrature {
        value: fine,
        error_estimate: (fine - coarse).abs(),
        level: refinement.level,
    };
    if !(q.error_estimate <= refinement.tolerance) {
        return Err(Error::QuadratureAccuracy {
            achieved: q.error_estimate,
            requested: refinement.tolerance,
            level: refinement.level,
        });
    }
    Ok(q)
}

/// Raises the level from `start` until the tolerance is certified.
pub fn green_adaptive(y: &[i64], start: u32, max_level: u32, tolerance: f64) -> Result<Quadrature> {
    let mut last = None;
    for level in start.max(1)..=max_level {
        match green(y, Refinement { level, tolerance }) {
            Ok(q) => return Ok(q),
            Err(e @ Error::QuadratureAccuracy { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::config("empty refinement range")))
}

/// `G(0)` for dimension `d`.
pub fn green_origin(d: usize, refinement: Refinement) -> Result<Quadrature> {
    crate::walk::Site::new(vec![0; d])?;
    green(&vec![0; d], refinement)
}
