//! Binomial variates for the multinomial leaps of the walk engine.
//!
//! Inversion (BINV) when `n·min(p, 1−p) < 10`, otherwise Hörmann's
//! transformed rejection with decomposition (BTRD), which needs no setup
//! tables and about 1.2 uniforms per variate.

use super::Stream;

/// `ln k! − (k + ½) ln(k + 1) + (k + 1) − ½ ln 2π`.
fn stirling_tail(k: u64) -> f64 {
    const TABLE: [f64; 10] = [
        0.081_061_466_795_327_26,
        0.041_340_695_955_409_29,
        0.027_677_925_684_998_34,
        0.020_790_672_103_765_09,
        0.016_644_691_189_821_19,
        0.013_876_128_823_070_75,
        0.011_896_709_945_891_77,
        0.010_411_265_261_972_09,
        0.009_255_462_182_712_733,
        0.008_330_563_433_362_87,
    ];
    if k < 10 {
        return TABLE[k as usize];
    }
    let r = 1.0 / (k as f64 + 1.0);
    let r2 = r * r;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - r2 / 1188.0) * r2) * r2) * r2) * r
}

fn inversion(rng: &mut Stream, n: u64, p: f64) -> u64 {
    let q = 1.0 - p;
    let s = p / q;
    let a = (n as f64 + 1.0) * s;
    let r0 = q.powf(n as f64);
    'restart: loop {
        let mut r = r0;
        let mut u = rng.uniform();
        let mut x = 0u64;
        while u > r {
            u -= r;
            x += 1;
            if x > n {
                continue 'restart;
            }
            r *= a / x as f64 - s;
        }
        return x;
    }
}

fn btrd(rng: &mut Stream, n: u64, p: f64) -> u64 {
    let nf = n as f64;
    let m = ((nf + 1.0) * p).floor();
    let r = p / (1.0 - p);
    let nr = (nf + 1.0) * r;
    let npq = nf * p * (1.0 - p);
    let sqrt_npq = npq.sqrt();
    let b = 1.15 + 2.53 * sqrt_npq;
    let a = -0.0873 + 0.0248 * b + 0.01 * p;
    let c = nf * p + 0.5;
    let alpha = (2.83 + 5.1 / b) * sqrt_npq;
    let v_r = 0.92 - 4.2 / b;
    let u_rv_r = 0.86 * v_r;
    loop {
        let mut v = rng.uniform();
        if v <= u_rv_r {
            let u = v / v_r - 0.43;
            return ((2.0 * a / (0.5 - u.abs()) + b) * u + c).floor() as u64;
        }
        let u;
        if v >= v_r {
            u = rng.uniform() - 0.5;
        } else {
            let w = v / v_r - 0.93;
            u = 0.5f64.copysign(w) - w;
            v = rng.uniform() * v_r;
        }
        let us = 0.5 - u.abs();
        let kf = ((2.0 * a / us + b) * u + c).floor();
        if kf < 0.0 || kf > nf {
            continue;
        }
        let k = kf as u64;
        v = v * alpha / (a / (us * us) + b);
        let mi = m as u64;
        let km = k.abs_diff(mi);
        if km <= 15 {
            let mut f = 1.0;
            if mi < k {
                for i in mi + 1..=k {
                    f *= nr / i as f64 - r;
                }
            } else {
                for i in k + 1..=mi {
                    v *= nr / i as f64 - r;
                }
            }
            if v <= f {
                return k;
            }
            continue;
        }
        let v = v.ln();
        let kmf = km as f64;
        let rho = (kmf / npq) * (((kmf / 3.0 + 0.625) * kmf + 1.0 / 6.0) / npq + 0.5);
        let t = -kmf * kmf / (2.0 * npq);
        if v < t - rho {
            return k;
        }
        if v > t + rho {
            continue;
        }
        let nm = nf - m + 1.0;
        let h = (m + 0.5) * ((m + 1.0) / (r * nm)).ln() + stirling_tail(mi) + stirling_tail(n - mi);
        let nk = nf - kf + 1.0;
        if v <= h + (nf + 1.0) * (nm / nk).ln() + (kf + 0.5) * (nk * r / (kf + 1.0)).ln()
            - stirling_tail(k)
            - stirling_tail(n - k)
        {
            return k;
        }
    }
}

impl Stream {
    /// A Binomial(`n`, `p`) variate.
    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        debug_assert!((0.0..=1.0).contains(&p));
        if n == 0 || p <= 0.0 {
            return 0;
        }
        if p >= 1.0 {
            return n;
        }
        let flip = p > 0.5;
        let q = if flip { 1.0 - p } else { p };
        let k = if (n as f64) * q < 10.0 {
            inversion(self, n, q)
        } else {
            btrd(self, n, q)
        };
        if flip {
            n - k
        } else {
            k
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Binomial, Discrete};
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn stirling_table_matches_log_gamma() {
        for k in 0..40u64 {
            let kf = k as f64;
            let exact = ln_gamma(kf + 1.0) - (kf + 0.5) * (kf + 1.0).ln() + (kf + 1.0)
                - 0.5 * (2.0 * std::f64::consts::PI).ln();
            assert!((stirling_tail(k) - exact).abs() < 1e-12, "k={k}");
        }
    }

    // Chi-square goodness of fit over cells with expected count >= 20,
    // compared with a generous bound (mean + 6 sd of the chi-square law).
    fn chi_square_fit(n: u64, p: f64, draws: usize, seed: u64) {
        let mut rng = Stream::new(seed, n);
        let mut hist = vec![0u64; n as usize + 1];
        for _ in 0..draws {
            hist[rng.binomial(n, p) as usize] += 1;
        }
        let law = Binomial::new(p, n).unwrap();
        let (mut stat, mut cells, mut rest_obs, mut rest_exp) = (0.0, 0usize, 0.0, 0.0);
        for (k, &obs) in hist.iter().enumerate() {
            let e = law.pmf(k as u64) * draws as f64;
            if e >= 20.0 {
                stat += (obs as f64 - e).powi(2) / e;
                cells += 1;
            } else {
                rest_obs += obs as f64;
                rest_exp += e;
            }
        }
        if rest_exp > 0.0 {
            stat += (rest_obs - rest_exp).powi(2) / rest_exp;
            cells += 1;
        }
        let df = (cells - 1) as f64;
        assert!(stat < df + 6.0 * (2.0 * df).sqrt(), "n={n} p={p}: chi2 {stat} on {df} df");
    }

    #[test]
    fn matches_binomial_pmf() {
        for &(n, p) in &[
            (1u64, 0.5),
            (7, 0.3),
            (19, 0.5),
            (40, 0.2),
            (100, 0.5),
            (333, 1.0 / 3.0),
            (1000, 0.5),
            (5000, 0.25),
            (100_000, 0.5),
            (60, 0.9),
        ] {
            chi_square_fit(n, p, 200_000, 11);
        }
    }

    #[test]
    fn degenerate_parameters() {
        let mut rng = Stream::new(0, 0);
        assert_eq!(rng.binomial(0, 0.5), 0);
        assert_eq!(rng.binomial(10, 0.0), 0);
        assert_eq!(rng.binomial(10, 1.0), 10);
        for _ in 0..1000 {
            assert!(rng.binomial(3, 0.5) <= 3);
        }
    }
}
