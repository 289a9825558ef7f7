use ltmax_core::stats::Stream;
use ltmax_core::walk::*;
use proptest::prelude::*;

#[test]
fn uniform_step_law() {
    let mut rng = Stream::new(1, 0);
    let mut counts = [0u64; 6];
    let total = 6_000_000u64;
    for _ in 0..total {
        let s = uniform_step(&mut rng, 3);
        let nz: Vec<(usize, i64)> = s.coords().iter().copied().enumerate().filter(|&(_, c)| c != 0).collect();
        assert_eq!(nz.len(), 1);
        let (axis, c) = nz[0];
        assert_eq!(c.abs(), 1);
        counts[2 * axis + usize::from(c < 0)] += 1;
    }
    let p = 1.0 / 6.0;
    let se = (p * (1.0 - p) / total as f64).sqrt();
    for c in counts {
        assert!((c as f64 / total as f64 - p).abs() < 5.0 * se, "{counts:?}");
    }
    let (mut a, mut b) = (Stream::new(9, 3), Stream::new(9, 3));
    for _ in 0..100 {
        assert_eq!(uniform_step(&mut a, 5), uniform_step(&mut b, 5));
    }
}

#[test]
fn short_discrete_runs() {
    let r = run_discrete(&WalkConfig::discrete(3, 0, 5, 0)).unwrap();
    assert_eq!(r.field.len(), 1);
    assert_eq!(r.field.get(&Site::origin(3)), 1.0);
    assert_eq!(r.max_local_time, 1);
    for rep in 0..200 {
        assert_eq!(run_discrete(&WalkConfig::discrete(3, 1, 5, rep)).unwrap().max_local_time, 1);
    }
}

#[test]
fn two_step_return_probability() {
    // enumeration of the 36 two-step paths
    let mut returning = 0;
    for a in 0..6usize {
        for b in 0..6usize {
            returning += u32::from(a / 2 == b / 2 && a != b);
        }
    }
    let exact = returning as f64 / 36.0;
    assert_eq!(exact, 1.0 / 6.0);
    let reps = 600_000u64;
    let hits = (0..reps)
        .filter(|&r| run_discrete(&WalkConfig::discrete(3, 2, 8, r)).unwrap().max_local_time == 2)
        .count();
    let se = (exact * (1.0 - exact) / reps as f64).sqrt();
    assert!((hits as f64 / reps as f64 - exact).abs() < 5.0 * se);
}

#[test]
fn tiny_horizon_stays_home() {
    let t = 1e-6;
    let mut moved = 0;
    for rep in 0..10_000 {
        let r = run_continuous(&WalkConfig::continuous(3, t, 2, rep)).unwrap();
        assert_eq!(r.field.total(), t);
        if r.field.len() == 1 {
            assert_eq!(r.field.get(&Site::origin(3)), t);
        } else {
            moved += 1;
        }
    }
    assert!(moved <= 1);
}

#[test]
fn jump_count_is_poisson_mean() {
    let t = 1000.0;
    let reps = 10_000u64;
    let jumps: Vec<f64> = (0..reps)
        .map(|r| {
            let mut field = LocalTimeField::new(Mode::Continuous, SiteCodec::new(3).unwrap());
            run_continuous_in(&WalkConfig::continuous(3, t, 3, r), &mut field, None, None).unwrap().jumps as f64
        })
        .collect();
    let mean = jumps.iter().sum::<f64>() / reps as f64;
    assert!((mean - t).abs() < 5.0 * (t / reps as f64).sqrt(), "{mean}");
}

#[test]
fn jump_sampled_fields() {
    let cfg = WalkConfig::continuous(3, 1.0, 4, 0);
    let f = run_jump_sampled(&cfg, 0).unwrap();
    let chain = sample_jump_chain(&cfg, 0).unwrap();
    assert_eq!(f.len(), 1);
    assert_eq!(f.get(&Site::origin(3)), chain.holds[0]);

    let reps = 10_000u64;
    let mut sum = 0.0;
    for r in 0..reps {
        let cfg = WalkConfig::continuous(3, 1.0, 4, r);
        let chain = sample_jump_chain(&cfg, 100).unwrap();
        let f = chain.field();
        let skel = chain.skeleton_field();
        assert_eq!(f.len(), skel.len());
        assert!(skel.iter_counts().all(|(k, _)| f.contains_key(k)));
        assert_eq!(skel.total_count(), 101);
        sum += f.total();
    }
    let mean = sum / reps as f64;
    assert!((mean - 101.0).abs() < 5.0 * (101.0 / reps as f64).sqrt());
}

#[test]
fn origin_samples_are_positive() {
    for r in 0..100 {
        let d = run_discrete_sample(r, false);
        assert!(d.value >= 1.0 && d.visits >= 1);
        let c = run_discrete_sample(r, true);
        assert!(c.value > 0.0);
    }
}

fn run_discrete_sample(r: u64, continuous: bool) -> LocalTimeSample {
    let cfg = if continuous {
        WalkConfig::continuous(3, 1.0, 6, r)
    } else {
        WalkConfig::discrete(3, 1, 6, r)
    };
    origin_local_time_sample(&cfg, 10_000).unwrap()
}

/// Exact `max_x P(S_n = x)` for the simple walk on Z^3 by convolution.
fn exact_sup(n: usize) -> f64 {
    let w = 2 * n + 1;
    let idx = |x: usize, y: usize, z: usize| (x * w + y) * w + z;
    let mut p = vec![0.0f64; w * w * w];
    p[idx(n, n, n)] = 1.0;
    for _ in 0..n {
        let mut q = vec![0.0f64; w * w * w];
        for x in 1..w - 1 {
            for y in 1..w - 1 {
                for z in 1..w - 1 {
                    let v = p[idx(x, y, z)];
                    if v == 0.0 {
                        continue;
                    }
                    let s = v / 6.0;
                    q[idx(x + 1, y, z)] += s;
                    q[idx(x - 1, y, z)] += s;
                    q[idx(x, y + 1, z)] += s;
                    q[idx(x, y - 1, z)] += s;
                    q[idx(x, y, z + 1)] += s;
                    q[idx(x, y, z - 1)] += s;
                }
            }
        }
        p = q;
    }
    p.into_iter().fold(0.0, f64::max)
}

#[test]
fn diffusive_scaling_is_bounded() {
    let ns = [16u64, 64, 256];
    let reps = 1_000_000u64;
    let rows = diffusive_scaling_check(3, &ns, reps, 10).unwrap();
    for row in &rows {
        assert!(row.scaled.is_finite() && row.scaled <= 2.0, "{row:?}");
        assert_eq!(row.parity_violations, 0);
    }
    for (row, n) in rows.iter().zip([16usize, 64]) {
        let p = exact_sup(n);
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((row.sup_probability - p).abs() < 5.0 * se + 1e-12, "n={n}: {} vs {p}", row.sup_probability);
        assert!(p * (n as f64).powf(1.5) <= 2.0);
    }
}

#[test]
fn skeleton_matches_discrete_law() {
    let reps = 20_000u64;
    let n = 200u64;
    let (mut a, mut a2, mut b, mut b2) = (0.0, 0.0, 0.0, 0.0);
    for r in 0..reps {
        let x = sample_jump_chain(&WalkConfig::continuous(3, 1.0, 40, r), n).unwrap().skeleton_field().max_count() as f64;
        let y = run_discrete(&WalkConfig::discrete(3, n, 41, r)).unwrap().max_local_time as f64;
        a += x;
        a2 += x * x;
        b += y;
        b2 += y * y;
    }
    let k = reps as f64;
    let (ma, mb) = (a / k, b / k);
    let se = ((a2 / k - ma * ma) / k + (b2 / k - mb * mb) / k).sqrt();
    assert!((ma - mb).abs() < 5.0 * se, "{ma} {mb}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_invariants(d in 3usize..=8, n in 0u64..3000, seed in any::<u64>(), rep in 0u64..1000) {
        let cfg = WalkConfig::discrete(d, n, seed, rep).with_path();
        let r = run_discrete(&cfg).unwrap();
        prop_assert_eq!(r.field.total_count(), n + 1);
        prop_assert_eq!(r.field.entry_sum(), (n + 1) as f64);
        prop_assert!(r.field.iter_counts().all(|(_, c)| c > 0));
        let scan = r.field.iter_counts().map(|(_, c)| c).max().unwrap();
        prop_assert_eq!(r.max_local_time, scan);
        prop_assert_eq!(r.path.as_ref().unwrap().len() as u64, n + 1);
        prop_assert_eq!(r.path.as_ref().unwrap().site(n as usize), r.final_site.clone());
        let again = run_discrete(&cfg).unwrap();
        prop_assert!(again.field.identical(&r.field));
    }

    #[test]
    fn continuous_invariants(d in 3usize..=6, t in 1e-3f64..2000.0, seed in any::<u64>()) {
        let cfg = WalkConfig::continuous(d, t, seed, 0);
        let r = run_continuous(&cfg).unwrap();
        let total = r.field.entry_sum();
        prop_assert!((total - t).abs() <= 2.0 * f64::EPSILON * t.max(1.0));
        prop_assert!(r.field.iter_keys().all(|(_, v)| v > 0.0));
        prop_assert_eq!(r.max_local_time, r.field.iter_keys().map(|(_, v)| v).fold(0.0, f64::max));
        prop_assert_eq!(r.field.len(), r.skeleton.field.len());
        if let Some(times) = &r.jump_times {
            prop_assert!(times.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(times.iter().all(|&x| x >= 0.0));
        }
        let again = run_continuous(&cfg).unwrap();
        prop_assert!(again.field.identical(&r.field));
    }
}
