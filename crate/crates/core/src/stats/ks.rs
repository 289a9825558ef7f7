use crate::error::{Error, Result};

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and a
/// continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    ks_distance_with_left(samples, &cdf, &cdf)
}

/// KS distance against a law that may have atoms: `cdf(v) = P(X ≤ v)` and
/// `cdf_left(v) = P(X < v)`. Both one-sided gaps are checked at every
/// distinct sample value, which is where the supremum is attained.
pub fn ks_distance_with_left<F, G>(samples: &[f64], cdf: F, cdf_left: G) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if samples.is_empty() {
        return Err(Error::input("ks_distance needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::input("ks_distance got a NaN sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d.max((upto - cdf(v)).abs()).max((below - cdf_left(v)).abs());
        i = j;
    }
    Ok(d.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Stream;

    fn unit_exp(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x).exp_m1()
        }
    }

    #[test]
    fn single_sample_at_median() {
        let d = ks_distance(&[2f64.ln()], unit_exp).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_samples() {
        let c = 0.3;
        let d = ks_distance(&[c; 17], unit_exp).unwrap();
        let f = unit_exp(c);
        assert!((d - f.max(1.0 - f)).abs() < 1e-15);
    }

    #[test]
    fn calibrated_on_own_law() {
        let mut s = Stream::new(123, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| s.exp1()).collect();
        assert!(ks_distance(&xs, unit_exp).unwrap() <= 0.01);
    }

    #[test]
    fn atoms_need_left_limits() {
        // point mass at 1
        let xs = [1.0; 10];
        let cdf = |x: f64| if x >= 1.0 { 1.0 } else { 0.0 };
        let left = |x: f64| if x > 1.0 { 1.0 } else { 0.0 };
        assert_eq!(ks_distance_with_left(&xs, cdf, left).unwrap(), 0.0);
        assert!(ks_distance(&[], cdf).is_err());
    }
}
