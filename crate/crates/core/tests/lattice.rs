use ltmax_core::lattice::*;
use ltmax_core::walk::Site;
use ltmax_core::Error;
use proptest::prelude::*;
use statrs::function::gamma::gamma;

const G0_3: f64 = 1.516386059151978;
const GAMMA_3: f64 = 0.659462670449000857;
const ALPHA_3: f64 = 0.928306406258953978;

fn watson() -> f64 {
    let pi = std::f64::consts::PI;
    6f64.sqrt() / (32.0 * pi.powi(3))
        * gamma(1.0 / 24.0)
        * gamma(5.0 / 24.0)
        * gamma(7.0 / 24.0)
        * gamma(11.0 / 24.0)
}

#[test]
fn green_origin_d3_matches_watson() {
    let q = green_origin(3, Refinement::default()).unwrap();
    assert!((q.value - watson()).abs() < 1e-12, "{} vs {}", q.value, watson());
    assert!((q.value - G0_3).abs() < 1e-13);
    assert!(q.error_estimate <= 1e-6);
}

#[test]
fn green_origin_higher_dims() {
    for (d, oracle) in [(4, 1.239467121848482), (5, 1.156308124840231)] {
        let q = green_origin(d, Refinement::default()).unwrap();
        assert!((q.value - oracle).abs() < 1e-11, "d={d}: {}", q.value);
    }
}

#[test]
fn refinement_estimates_shrink_and_bracket() {
    for d in [3usize, 4, 5] {
        let qs: Vec<Quadrature> = (1..=3)
            .map(|l| green_origin(d, Refinement { level: l, tolerance: 1.0 }).unwrap())
            .collect();
        for w in qs.windows(2) {
            assert!(w[1].error_estimate < w[0].error_estimate, "d={d}");
            assert!((w[1].value - w[0].value).abs() <= w[0].error_estimate + 1e-15);
        }
    }
}

#[test]
fn green_values_off_origin() {
    let cases: [(&[i64], f64); 12] = [
        (&[1, 0, 0], 0.51638605915151834),
        (&[2, 0, 0], 0.25733588725373481),
        (&[3, 0, 0], 0.16527078100896707),
        (&[4, 0, 0], 0.12173320365129977),
        (&[8, 0, 0], 0.059928284300157722),
        (&[16, 0, 0], 0.029871030783106067),
        (&[32, 0, 0], 0.014924428980679755),
        (&[1, 1, 0], 0.33114860212596423),
        (&[1, 1, 1], 0.26147012638589348),
        (&[2, 2, 2], 0.13590819616489585),
        (&[5, 5, 5], 0.055009734661991260),
        (&[10, 10, 10], 0.027551106061178899),
    ];
    for (y, oracle) in cases {
        let q = green_adaptive(y, 3, 8, 1e-11).unwrap();
        assert!((q.value - oracle).abs() < 1e-9, "{y:?}: {} vs {oracle}", q.value);
    }
}

#[test]
fn gamma_alpha_d3() {
    let ga = gamma_alpha(3, Refinement::default()).unwrap();
    assert_eq!(ga.method, Method::Quadrature);
    assert!((ga.gamma - 0.659463).abs() < 1e-4);
    assert!((ga.gamma - GAMMA_3).abs() < 1e-12);
    assert!((ga.alpha - ALPHA_3).abs() < 1e-11);
    assert!((ga.alpha - 0.92825).abs() < 1e-4);
    let cached = constants(3).unwrap();
    assert!((cached.gamma_alpha.gamma - ga.gamma).abs() < 1e-12);
}

#[test]
fn escape_probability_grows_with_dimension() {
    let g: Vec<f64> = (3..=5).map(|d| constants(d).unwrap().gamma_alpha.gamma).collect();
    assert!(g[0] < g[1] && g[1] < g[2] && g[2] < 1.0);
}

#[test]
fn constants_reject_bad_dimension() {
    assert!(matches!(constants(2), Err(Error::InvalidConfig(_))));
    assert!(matches!(constants(9), Err(Error::InvalidConfig(_))));
}

#[test]
fn neighbour_identity_and_symmetry() {
    let r = Refinement::default();
    let ga = gamma_alpha(3, r).unwrap();
    let e1 = hitting_prob(&Site::axis(3, 1), r).unwrap();
    assert!((e1.t_y - (1.0 - ga.gamma)).abs() <= e1.error_bound + ga.error_bound + 1e-13);
    assert!((e1.t_y - 0.340537329551).abs() < 1e-11);
    for axis in 0..3 {
        for sign in [1, -1] {
            let t = hitting_prob(&Site::unit(3, axis, sign), r).unwrap().t_y;
            assert!((t - e1.t_y).abs() < 1e-13);
        }
    }
    let two = hitting_prob(&Site::new(vec![2, 0, 0]).unwrap(), r).unwrap();
    assert!(two.t_y < e1.t_y && two.t_y > 0.0);
}

#[test]
fn axis_asymptote_settles() {
    let table = hitting_asymptote(3, &[1, 0, 0], &[4, 8, 16, 32], Refinement::default()).unwrap();
    let top = &table.rows[2..];
    let (a, b) = (top[0].scaled, top[1].scaled);
    assert!((a - b).abs() / b < 0.1);
    for w in table.rows.windows(2).skip(1) {
        assert!(w[1].step < w[0].step);
    }
    assert!((table.rows[3].t_y - 0.0098421037905285).abs() < 1e-11);
    // 3 / (2π G(0))
    let leading = 3.0 / (2.0 * std::f64::consts::PI * G0_3);
    assert!((table.extrapolated - leading).abs() < 3.0 * table.spread);
}

#[test]
fn axis_and_diagonal_agree() {
    let r = Refinement::default();
    let axis = hitting_asymptote(3, &[1, 0, 0], &[8, 16, 32], r).unwrap();
    let diag = hitting_asymptote(3, &[1, 1, 1], &[2, 5, 10], r).unwrap();
    assert!((diag.rows[2].t_y - 0.0181689260).abs() < 1e-9);
    assert!((axis.extrapolated - diag.extrapolated).abs() <= axis.spread + diag.spread);
}

#[test]
fn asymptote_rejects_bad_radii() {
    let r = Refinement::default();
    assert!(hitting_asymptote(3, &[1, 0, 0], &[4], r).is_err());
    assert!(hitting_asymptote(3, &[1, 0, 0], &[8, 4], r).is_err());
    assert!(hitting_asymptote(3, &[0, 0, 0], &[1, 2], r).is_err());
}

#[test]
fn mc_standard_error_scales() {
    let a = gamma_mc(3, 1000, 20_000, 9).unwrap();
    let b = gamma_mc(3, 1000, 40_000, 9).unwrap();
    let ratio = a.std_error / b.std_error;
    assert!((ratio - 2f64.sqrt()).abs() < 0.05, "{ratio}");
    assert_eq!(a.method, Method::Mc);
    assert!(a.gamma > GAMMA_3 - 5.0 * a.std_error);
}

#[test]
fn mc_is_deterministic() {
    assert_eq!(gamma_mc(4, 500, 3000, 1).unwrap(), gamma_mc(4, 500, 3000, 1).unwrap());
}

proptest! {
    #[test]
    fn alpha_gamma_consistency(g in 1e-6f64..(1.0 - 1e-6)) {
        let ga = GammaAlpha::from_gamma(3, g, Method::Mc, 0.0).unwrap();
        let back = -1.0 / (1.0 - ga.gamma).ln();
        prop_assert!(((back - ga.alpha) / ga.alpha).abs() < 1e-12);
    }
}
