use ltmax_core::stats::*;
use proptest::prelude::*;

#[test]
fn wilson_examples() {
    let (lo, _) = wilson_interval(0, 40, 0.99).unwrap();
    assert_eq!(lo, 0.0);
    let (_, hi) = wilson_interval(40, 40, 0.99).unwrap();
    assert_eq!(hi, 1.0);
    // closed form with z = 1.959963984540054
    let z: f64 = 1.959963984540054;
    let (n, p) = (100.0, 0.5);
    let centre = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
    let half = z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
    assert!((lo - (centre - half)).abs() < 1e-9 && (hi - (centre + half)).abs() < 1e-9);
    assert!((lo - 0.404).abs() < 5e-4 && (hi - 0.596).abs() < 5e-4);
    assert!(wilson_interval(0, 0, 0.95).is_err());
    assert!(wilson_interval(5, 4, 0.95).is_err());
}

#[test]
fn ks_examples() {
    let cdf = |x: f64| 1.0 - (-x).exp();
    let mut rng = Stream::new(17, 0);
    let s: Vec<f64> = (0..100_000).map(|_| rng.exp1()).collect();
    assert!(ks_distance(&s, cdf).unwrap() <= 0.01);
    assert!((ks_distance(&[std::f64::consts::LN_2], cdf).unwrap() - 0.5).abs() < 1e-12);
    let c = 0.3;
    let d = ks_distance(&[c; 7], cdf).unwrap();
    assert!((d - cdf(c).max(1.0 - cdf(c))).abs() < 1e-12);
    assert!(ks_distance(&[], cdf).is_err());
}

#[test]
fn merge_examples() {
    let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin() * 1e3).collect();
    let mut seq = Accumulator::new();
    xs.iter().for_each(|&x| seq.push(x));
    let (mut a, mut b) = (Accumulator::new(), Accumulator::new());
    xs[..613].iter().for_each(|&x| a.push(x));
    xs[613..].iter().for_each(|&x| b.push(x));
    assert_eq!(a.merge(&b).unwrap(), seq);
    assert_eq!(b.merge(&a).unwrap(), seq);
    assert_eq!(seq.merge(&Accumulator::new()).unwrap(), seq);
    assert!(seq.merge(&Accumulator::with_reservoir(4)).is_err());
}

#[test]
fn streams_replay() {
    let mut a = Stream::new(5, 11);
    let words: Vec<u32> = (0..100).map(|_| a.next_word()).collect();
    let mut b = Stream::new(5, 11);
    assert!(words.iter().all(|&w| w == b.next_word()));
    let mut c = Stream::at(a.frontier());
    let mut d = a.clone();
    for _ in 0..50 {
        assert_eq!(c.next_word(), d.next_word());
    }
    let mut e = Stream::new(5, 12);
    let other: Vec<u32> = (0..100).map(|_| e.next_word()).collect();
    assert_ne!(words, other);
}

#[test]
fn checkpoint_resume_matches() {
    let mut run = ResumableRun::new("sum", serde_json::json!({"k": 1}), 3, 5000);
    run.chunk = 256;
    let f = |_: u64, s: &mut Stream| vec![s.exp1()];
    let full = run.run(None, None, f).unwrap().into_checkpoint();
    let mut part = run.clone();
    part.stop_after_chunks = Some(4);
    let status = part.run(None, None, f).unwrap();
    assert!(matches!(status, RunStatus::Interrupted(_)));
    let text = status.checkpoint().to_json().unwrap();
    let resumed = run.run(Some(Checkpoint::from_json(&text).unwrap()), None, f).unwrap().into_checkpoint();
    assert_eq!(resumed.accumulator("value").unwrap(), full.accumulator("value").unwrap());
}

proptest! {
    #[test]
    fn merge_is_a_commutative_monoid(
        xs in proptest::collection::vec(-1e6f64..1e6, 0..60),
        ys in proptest::collection::vec(-1e6f64..1e6, 0..60),
        zs in proptest::collection::vec(-1e6f64..1e6, 0..60),
    ) {
        let acc = |v: &[f64]| {
            let mut a = Accumulator::new();
            v.iter().for_each(|&x| a.push(x));
            a
        };
        let (a, b, c) = (acc(&xs), acc(&ys), acc(&zs));
        prop_assert_eq!(a.merge(&b).unwrap(), b.merge(&a).unwrap());
        prop_assert_eq!(a.merge(&b).unwrap().merge(&c).unwrap(), a.merge(&b.merge(&c).unwrap()).unwrap());
        prop_assert_eq!(a.merge(&Accumulator::new()).unwrap(), a.clone());
    }

    #[test]
    fn wilson_contains_point_estimate(trials in 1u64..10_000, frac in 0.0f64..=1.0, level in 0.5f64..0.999) {
        let k = (frac * trials as f64).floor() as u64;
        let (lo, hi) = wilson_interval(k, trials, level).unwrap();
        let p = k as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }
}
