use ltmax_core::deviation::*;
use ltmax_core::lattice::{GammaAlpha, Method};
use ltmax_core::stats::{ks_distance, Stream};
use ltmax_core::walk::Mode;
use proptest::prelude::*;

const GAMMA_3: f64 = 0.659462670449000857;

fn ga() -> GammaAlpha {
    GammaAlpha::from_gamma(3, GAMMA_3, Method::Quadrature, 0.0).unwrap()
}

fn query(mode: Mode, direction: Direction, beta: f64, u: f64, horizon: f64) -> TailQuery {
    TailQuery {
        d: 3,
        mode,
        direction,
        beta,
        u,
        horizon,
        reps: 2000,
        seed: 17,
    }
}

#[test]
fn upward_theory_examples() {
    let g = ga();
    for t in [10.0, 1e3, 1e7] {
        let th = upward_tail_theory(&query(Mode::Continuous, Direction::Up, 1.0, 0.3, t), &g).unwrap();
        assert!(th.out_of_range);
        assert!((th.value - GAMMA_3 * (-GAMMA_3 * 0.3f64).exp()).abs() < 1e-14);
    }
    let th = upward_tail_theory(&query(Mode::Continuous, Direction::Up, 1.2, 0.0, 1e4), &g).unwrap();
    assert!(!th.out_of_range);
    assert!((th.value - 0.1045177897).abs() < 1e-9);
    assert!((th.value - 0.659463 * 10f64.powf(-0.8)).abs() < 1e-5);
    assert!(upward_tail_theory(&query(Mode::Continuous, Direction::Up, 0.9, 0.0, 1e4), &g).is_err());
}

#[test]
fn downward_theory_examples() {
    let g = ga();
    for t in [5.0, 1e4, 1e8] {
        let th = downward_tail_theory(&query(Mode::Continuous, Direction::Down, 1.0, 0.0, t), &g).unwrap();
        assert!((th.exponent - GAMMA_3).abs() < 1e-14);
        assert!((th.probability - (-GAMMA_3).exp()).abs() < 1e-14);
    }
    let th = downward_tail_theory(&query(Mode::Continuous, Direction::Down, 0.9, 0.0, 1e4), &g).unwrap();
    assert!((th.exponent - 1.656495334).abs() < 1e-8);
    assert!((th.probability - 0.190806523).abs() < 1e-8);
    let far = downward_tail_theory(&query(Mode::Continuous, Direction::Down, 0.9, 80.0, 1e4), &g).unwrap();
    assert!(far.exponent < 1e-20 && far.probability == 1.0);
    assert!(downward_tail_theory(&query(Mode::Continuous, Direction::Down, 1.1, 0.0, 1e4), &g).is_err());
    assert!(downward_tail_theory(&query(Mode::Continuous, Direction::Down, 0.0, 0.0, 1e4), &g).is_err());
}

#[test]
fn moderate_forms() {
    let g = ga();
    let up = |a| moderate_tail_theory(Mode::Continuous, Direction::Up, a, 1e4, &g).unwrap();
    assert_eq!(up(0.0), GAMMA_3);
    assert!((up(1.0 / GAMMA_3) - GAMMA_3 / std::f64::consts::E).abs() < 1e-15);
    let a = (1e4f64).ln().ln() / GAMMA_3;
    let down = moderate_tail_theory(Mode::Continuous, Direction::Down, a, 1e4, &g).unwrap();
    assert!((down - (-GAMMA_3 * (GAMMA_3 * a).exp()).exp()).abs() < 1e-15);
    let disc = moderate_tail_theory(Mode::Discrete, Direction::Up, 0.0, 1e4, &g).unwrap();
    let m = (g.alpha * 1e4f64.ln()).floor();
    assert!((disc - GAMMA_3 * 1e4 * (1.0 - GAMMA_3).powf(m)).abs() < 1e-10);
    assert!(moderate_tail_theory(Mode::Continuous, Direction::Up, -1.0, 1e4, &g).is_err());
}

#[test]
fn impossible_upward_event_is_underpowered() {
    let mut q = query(Mode::Discrete, Direction::Up, 99.0, 0.0, 100.0);
    q.reps = 10;
    let r = tail_mc(&q, &ga()).unwrap();
    assert_eq!(r.empirical, 0.0);
    assert_eq!(r.ci_lo, 0.0);
    assert!(r.underpowered);
}

#[test]
fn tail_mc_is_reproducible() {
    let q = query(Mode::Continuous, Direction::Down, 0.9, 0.0, 200.0);
    let a = tail_mc(&q, &ga()).unwrap();
    assert_eq!(a, tail_mc(&q, &ga()).unwrap());
    assert!(a.ci_lo <= a.empirical && a.empirical <= a.ci_hi);
    assert!(a.log_ratio.is_some());
}

#[test]
fn synthetic_gumbel_calibrates() {
    let mut rng = Stream::new(8, 0);
    let s: Vec<f64> = (0..100_000).map(|_| gumbel_sample(&mut rng, GAMMA_3)).collect();
    assert!(ks_distance(&s, |u| gumbel_reference_cdf(u, GAMMA_3)).unwrap() <= 0.01);
}

#[test]
fn gumbel_cdf_is_a_cdf() {
    let grid: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.1).collect();
    let f: Vec<f64> = grid.iter().map(|&u| gumbel_reference_cdf(u, GAMMA_3)).collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    assert!(f[0] < 1e-9 && f[f.len() - 1] > 1.0 - 1e-9);
}

#[test]
fn single_block_bound_is_the_direct_estimate() {
    let c = block_bound_check(3, 1.0, 1.0, 300.0, 0.0, 2000, 4, &ga()).unwrap();
    assert_eq!(c.bound.blocks, 1);
    assert_eq!(c.bound.bound, c.direct.empirical);
    assert!(c.holds);
}

#[test]
fn gumbel_fit_rejects_bad_ladder() {
    assert!(gumbel_fit(3, &[100.0, 10.0], 10, 1, &ga()).is_err());
    assert!(gumbel_fit(3, &[], 10, 1, &ga()).is_err());
}

proptest! {
    #[test]
    fn discrete_upward_forms_agree(beta in 1.01f64..3.0, u in -3.0f64..3.0, n in 10u64..1_000_000) {
        let g = ga();
        let q = TailQuery { d: 3, mode: Mode::Discrete, direction: Direction::Up, beta, u, horizon: n as f64, reps: 1, seed: 0 };
        let a = upward_tail_theory(&q, &g).unwrap().value;
        let b = upward_tail_c_form(&q, &g).unwrap();
        prop_assert!(((a - b) / b).abs() < 1e-10);
    }

    #[test]
    fn continuous_forms_agree_with_direct(beta in 0.5f64..3.0, u in -3.0f64..3.0, t in 2.0f64..1e6) {
        let g = ga();
        let direct = GAMMA_3 * (-GAMMA_3 * u).exp() * t.powf(1.0 - beta);
        let got = if beta > 1.0 {
            upward_tail_theory(&query(Mode::Continuous, Direction::Up, beta, u, t), &g).unwrap().value
        } else {
            downward_tail_theory(&query(Mode::Continuous, Direction::Down, beta, u, t), &g).unwrap().exponent
        };
        prop_assert!(((got - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn block_bound_monotone_in_blocks(successes in 1u64..100, t1 in 10.0f64..1e3, t2 in 1e3f64..1e6) {
        let a = block_product_bound(0.9, 0.45, t1, successes, 100).unwrap();
        let b = block_product_bound(0.9, 0.45, t2, successes, 100).unwrap();
        prop_assert!(b.blocks >= a.blocks);
        prop_assert!(b.bound <= a.bound);
    }
}
