use std::path::{Path, PathBuf};

use ltmax_core::deviation::{gumbel_fit, gumbel_reference_cdf, tail_report, Direction, TailQuery};
use ltmax_core::forcing::{
    holding_time_law_check, naive_b_probability, product_formula_bins, sample_traces, segment_experiment,
    weighted_b_sampler, ForcingParams, ForcingTrace, SegmentParams,
};
use ltmax_core::lattice::{constants, gamma_mc, hitting_prob, GammaAlpha, Refinement};
use ltmax_core::laws::{
    count_exceedances, count_path_representation, empirical_law_check, threshold_m, ExponentialLaw, GeometricLaw,
    MomentRow, TailLaw, ThresholdSpec, Z_THRESHOLD,
};
use ltmax_core::replicate::map_replicates;
use ltmax_core::stats::{Checkpoint, ResumableRun, RunStatus};
use ltmax_core::walk::{
    origin_local_time_sample, run_continuous, run_discrete, two_point_local_time_sample, LocalTimeField, Mode,
    Path as WalkPath, Site, SiteCodec, WalkConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::Output;
use crate::plot::{emit_plot, Plot, Series};
use crate::{stop_flag, CliError};

type Res<T = ()> = Result<T, CliError>;

pub fn dispatch(cmd: Command) -> Res {
    match cmd {
        Command::Constants(a) => run_constants(a),
        Command::Laws(a) => run_laws(a),
        Command::Count(a) => run_count(a, None),
        Command::Tail(a) => run_tail(a, None),
        Command::Gumbel(a) => run_gumbel(a),
        Command::Forcing(a) => run_forcing(a),
        Command::Segments(a) => run_segments(a),
        Command::CheckpointResume(a) => run_resume(a),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn gamma_alpha(d: usize) -> Res<GammaAlpha> {
    Ok(constants(d)?.gamma_alpha)
}

fn plot(common: &Common, out: &Output, name: &str, p: Plot) -> Res {
    if !common.no_plot {
        emit_plot(&p, &out.path(name))?;
    }
    Ok(())
}

/// Runs a chunked replicate plan with checkpointing and interrupt handling.
#[allow(clippy::too_many_arguments)]
fn resumable<F>(
    label: &str,
    config: Value,
    common: &Common,
    reps: u64,
    names: Vec<String>,
    checkpoint: Option<PathBuf>,
    out: &Output,
    resume: Option<Checkpoint>,
    f: F,
) -> Res<Checkpoint>
where
    F: Fn(u64) -> ltmax_core::Result<Vec<f64>> + Sync + Send,
{
    let path = checkpoint.unwrap_or_else(|| out.path(&format!("{label}.checkpoint.json")));
    let mut run = ResumableRun::new(label, config, common.seed, reps);
    run.names = names;
    run.checkpoint_path = Some(path.clone());
    run.stop_after_chunks = common.stop_after_chunks;
    let failure = std::sync::Mutex::new(None::<String>);
    let status = run.run(resume, Some(stop_flag()), |r, _| match f(r) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().expect("not poisoned").get_or_insert(e.to_string());
            vec![f64::NAN; run.names.len()]
        }
    })?;
    if let Some(e) = failure.into_inner().expect("not poisoned") {
        return Err(CliError::Runtime(e));
    }
    match status {
        RunStatus::Complete(c) => Ok(c),
        RunStatus::Interrupted(_) => Err(CliError::Interrupted(path)),
    }
}

#[derive(Serialize)]
struct ConstantsRow {
    d: usize,
    method: &'static str,
    green_origin: Option<f64>,
    gamma: f64,
    alpha: f64,
    error_bound: f64,
    std_error: Option<f64>,
    bias_bound: Option<f64>,
}

fn run_constants(a: ConstantsArgs) -> Res {
    let out = Output::new(&a.common.out)?;
    let mut rows = Vec::new();
    for &d in &a.d {
        let c = constants(d)?;
        println!(
            "d={d}: G(0) = {:.12}, gamma = {:.12}, alpha = {:.12} (error <= {:.1e})",
            c.green_origin, c.gamma_alpha.gamma, c.gamma_alpha.alpha, c.gamma_alpha.error_bound
        );
        rows.push(ConstantsRow {
            d,
            method: "quadrature",
            green_origin: Some(c.green_origin),
            gamma: c.gamma_alpha.gamma,
            alpha: c.gamma_alpha.alpha,
            error_bound: c.gamma_alpha.error_bound,
            std_error: None,
            bias_bound: None,
        });
        if a.mc_reps > 0 {
            let mc = gamma_mc(d, a.mc_horizon, a.mc_reps, a.common.seed.wrapping_add(d as u64))?;
            println!("d={d}: Monte Carlo gamma = {:.6} +- {:.1e}", mc.gamma, mc.error_bound);
            rows.push(ConstantsRow {
                d,
                method: "mc",
                green_origin: None,
                gamma: mc.gamma,
                alpha: mc.alpha,
                error_bound: mc.error_bound,
                std_error: Some(mc.std_error),
                bias_bound: Some(mc.bias_bound),
            });
        }
    }
    out.csv("constants.csv", &rows)?;
    out.summary("constants", a.common.seed, &to_value(&a), to_value(&rows), &[])?;
    let quad: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.method == "quadrature")
        .map(|r| (r.d as f64, r.gamma))
        .collect();
    plot(
        &a.common,
        &out,
        "constants.svg",
        Plot {
            title: "escape probability".into(),
            x_label: "d".into(),
            y_label: "gamma_d".into(),
            series: vec![Series::new("quadrature", quad)],
            ..Plot::default()
        },
    )
}

fn run_laws(a: LawsArgs) -> Res {
    let out = Output::new(&a.common.out)?;
    let ga = gamma_alpha(a.d)?;
    let mode: Mode = a.mode.into();
    let seed = a.common.seed;
    let cfg = |r: u64| match mode {
        Mode::Discrete => WalkConfig::discrete(a.d, 1, seed, r),
        Mode::Continuous => WalkConfig::continuous(a.d, 1.0, seed, r),
    };
    let (rate, t_y, y) = match &a.y {
        Some(c) => {
            let y = Site::new(c.clone())?;
            if y.dim() != a.d {
                return Err(CliError::Usage(format!("--y has {} coordinates, expected {}", y.dim(), a.d)));
            }
            let t = hitting_prob(&y, Refinement::default())?.t_y;
            (ga.gamma / (1.0 + t), Some(t), Some(y))
        }
        None => (ga.gamma, None, None),
    };
    if a.reps == 0 {
        return Err(CliError::Usage("reps must be positive".into()));
    }
    let samples: Vec<ltmax_core::Result<f64>> = map_replicates(seed, 0..a.reps, |r, _| {
        let s = match &y {
            Some(y) => two_point_local_time_sample(&cfg(r), y, a.truncation)?,
            None => origin_local_time_sample(&cfg(r), a.truncation)?,
        };
        Ok(s.value)
    });
    let samples = samples.into_iter().collect::<ltmax_core::Result<Vec<f64>>>()?;
    let law: Box<dyn TailLaw> = match mode {
        Mode::Discrete => Box::new(GeometricLaw::new(rate)?),
        Mode::Continuous => Box::new(ExponentialLaw::new(rate)?),
    };
    let report = empirical_law_check(&samples, law.as_ref(), &a.levels)?;
    let mut flags = Vec::new();
    if report.underpowered {
        flags.push("UNDERPOWERED".to_string());
    }
    if !report.passes(Z_THRESHOLD) {
        flags.push("Z_ABOVE_5".to_string());
    }
    println!(
        "laws: {} samples, rate {rate:.6}, KS {:.4}, max |z| {:.2} {}",
        report.samples,
        report.ks_distance,
        report.max_abs_z,
        flags.join(" ")
    );
    out.csv("laws.csv", &report.levels)?;
    let bias = cfg(0).validate().map(|_| ltmax_core::walk::truncation_bias_bound(a.d, a.truncation)).ok();
    out.summary(
        "laws",
        seed,
        &to_value(&a),
        json!({"rate": rate, "t_y": t_y, "truncation_bias_bound": bias, "report": report}),
        &flags,
    )?;
    let pts = |f: &dyn Fn(&ltmax_core::laws::LevelRow) -> f64| report.levels.iter().map(|r| (r.level, f(r))).collect();
    plot(
        &a.common,
        &out,
        "laws.svg",
        Plot {
            title: if y.is_some() { "two-point tail".into() } else { "one-point tail".into() },
            x_label: "level".into(),
            y_label: "P(local time > level)".into(),
            log_y: true,
            series: vec![Series::new("empirical", pts(&|r| r.empirical)), Series::new("theory", pts(&|r| r.theory))],
            note: Some(format!("KS {:.4}", report.ks_distance)),
            ..Plot::default()
        },
    )
}

fn count_names(ns: &[u64]) -> Vec<String> {
    let mut names = Vec::new();
    for n in ns {
        for k in ["count", "count_sq", "positive"] {
            names.push(format!("n{n}.{k}"));
        }
    }
    names.push("mismatches".into());
    names
}

fn run_count(a: CountArgs, resume: Option<Checkpoint>) -> Res {
    let out = Output::new(&a.common.out)?;
    let ga = gamma_alpha(a.d)?;
    if a.beta.is_nan() || a.beta <= 1.0 {
        return Err(CliError::Usage(format!("count needs beta > 1, got {}", a.beta)));
    }
    if a.reps == 0 || a.n.is_empty() {
        return Err(CliError::Usage("count needs reps > 0 and at least one n".into()));
    }
    let mut ns = a.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut ms = Vec::new();
    for &n in &ns {
        let m = threshold_m(&ThresholdSpec::discrete(a.beta, a.u, n), &ga)?;
        if m < 0 {
            return Err(CliError::Usage(format!("threshold m = {m} < 0 at n = {n}; raise u")));
        }
        ms.push(m as u64);
    }
    let n_max = *ns.last().expect("nonempty");
    let codec = SiteCodec::new(a.d)?;
    WalkConfig::discrete(a.d, n_max, a.common.seed, 0).validate()?;
    let seed = a.common.seed;
    let config = json!({"command": "count", "args": to_value(&a)});
    let ckpt = resumable(
        "count",
        config.clone(),
        &a.common,
        a.reps,
        count_names(&ns),
        a.checkpoint.clone(),
        &out,
        resume,
        |r| {
            let run = run_discrete(&WalkConfig::discrete(a.d, n_max, seed, r).with_path())?;
            let keys = run.path.as_ref().expect("path requested").keys();
            let mut field = LocalTimeField::new(Mode::Discrete, codec);
            let mut row = Vec::with_capacity(3 * ns.len() + 1);
            let mut mismatches = 0u64;
            let mut next = 0usize;
            for (s, &k) in keys.iter().enumerate() {
                field.add_visit(k);
                while next < ns.len() && ns[next] == s as u64 {
                    let direct = count_exceedances(&field, ms[next])?;
                    let via = count_path_representation(&WalkPath::from_keys(codec, keys[..=s].to_vec()), ms[next]);
                    mismatches += u64::from(direct != via);
                    let c = direct as f64;
                    row.extend([c, c * c, f64::from(u8::from(direct > 0))]);
                    next += 1;
                }
            }
            row.push(mismatches as f64);
            Ok(row)
        },
    )?;
    let mut rows = Vec::new();
    for (&n, &m) in ns.iter().zip(&ms) {
        let acc = |k: &str| ckpt.accumulator(&format!("n{n}.{k}"));
        rows.push(MomentRow::from_accumulators(
            n,
            m as i64,
            acc("count")?,
            acc("count_sq")?,
            acc("positive")?,
            ga.gamma,
        )?);
    }
    let mismatches = ckpt.accumulator("mismatches")?.sum() as u64;
    for r in &rows {
        println!(
            "count: n={} m={} mean {:.4} (theory {:.4}, ratio {:.3}), E[N^2]/E[N] {:.3}",
            r.n, r.m, r.mean, r.theory, r.ratio, r.second_to_first
        );
    }
    out.csv("count.csv", &rows)?;
    let flags: Vec<String> = if mismatches > 0 { vec!["COUNT_IDENTITY_VIOLATED".into()] } else { vec![] };
    out.summary("count", seed, &config, json!({"rows": rows, "identity_mismatches": mismatches}), &flags)?;
    plot(
        &a.common,
        &out,
        "count.svg",
        Plot {
            title: "mean exceedance count".into(),
            x_label: "n".into(),
            y_label: "E[N]".into(),
            log_x: true,
            log_y: true,
            series: vec![
                Series::new("empirical", rows.iter().map(|r| (r.n as f64, r.mean)).collect()),
                Series::new("theory", rows.iter().map(|r| (r.n as f64, r.theory)).collect()),
            ],
            ..Plot::default()
        },
    )?;
    if mismatches > 0 {
        return Err(CliError::Invariant(format!(
            "counting identity: path representation differs from the direct count in {mismatches} replicate(s)"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct TailRow {
    mode: Mode,
    direction: Direction,
    beta: f64,
    u: f64,
    horizon: f64,
    reps: u64,
    level: f64,
    successes: u64,
    empirical: f64,
    ci_lo: f64,
    ci_hi: f64,
    theory: f64,
    ratio: f64,
    exponent: Option<f64>,
    log_ratio: Option<f64>,
    underpowered: bool,
    out_of_range: bool,
}

fn run_tail(a: TailArgs, resume: Option<Checkpoint>) -> Res {
    let out = Output::new(&a.common.out)?;
    let ga = gamma_alpha(a.d)?;
    let mode: Mode = a.mode.into();
    let horizon = match (mode, a.n, a.t) {
        (Mode::Discrete, Some(n), _) => n as f64,
        (Mode::Discrete, None, _) => return Err(CliError::Usage("discrete mode needs --n".into())),
        (Mode::Continuous, _, Some(t)) => t,
        (Mode::Continuous, _, None) => return Err(CliError::Usage("continuous mode needs --t".into())),
    };
    let query = TailQuery {
        d: a.d,
        mode,
        direction: a.direction.into(),
        beta: a.beta,
        u: a.u,
        horizon,
        reps: a.reps,
        seed: a.common.seed,
    };
    query.validate()?;
    let level = query.spec().level(&ga)?;
    let seed = a.common.seed;
    let config = json!({"command": "tail", "args": to_value(&a)});
    let ckpt = resumable(
        "tail",
        config.clone(),
        &a.common,
        a.reps,
        vec!["max".into(), "hit".into()],
        a.checkpoint.clone(),
        &out,
        resume,
        |r| {
            let max = match mode {
                Mode::Discrete => run_discrete(&WalkConfig::discrete(a.d, horizon as u64, seed, r))?.max_local_time as f64,
                Mode::Continuous => run_continuous(&WalkConfig::continuous(a.d, horizon, seed, r))?.max_local_time,
            };
            Ok(vec![max, f64::from(u8::from(query.direction.hit(max, level)))])
        },
    )?;
    let successes = ckpt.accumulator("hit")?.sum() as u64;
    let rep = tail_report(&query, &ga, successes)?;
    let mut flags = Vec::new();
    if rep.underpowered {
        flags.push("UNDERPOWERED".to_string());
    }
    if rep.out_of_range {
        flags.push("BETA_AT_BOUNDARY".to_string());
    }
    println!(
        "tail: empirical {} ({successes}/{}), 99% CI [{:.4}, {:.4}], theory {:.4e}, ratio {:.3} {}",
        rep.empirical,
        a.reps,
        rep.ci_lo,
        rep.ci_hi,
        rep.theory,
        rep.ratio,
        flags.join(" ")
    );
    let row = TailRow {
        mode,
        direction: query.direction,
        beta: a.beta,
        u: a.u,
        horizon,
        reps: a.reps,
        level: rep.level,
        successes,
        empirical: rep.empirical,
        ci_lo: rep.ci_lo,
        ci_hi: rep.ci_hi,
        theory: rep.theory,
        ratio: rep.ratio,
        exponent: rep.exponent,
        log_ratio: rep.log_ratio,
        underpowered: rep.underpowered,
        out_of_range: rep.out_of_range,
    };
    out.csv("tail.csv", &[row])?;
    let maxima = ckpt.accumulator("max")?;
    out.summary(
        "tail",
        seed,
        &config,
        json!({"report": rep, "mean_maximum": maxima.mean(), "largest_maximum": maxima.max()}),
        &flags,
    )?;
    plot(
        &a.common,
        &out,
        "tail.svg",
        Plot {
            title: "deviation probability".into(),
            series: vec![Series::new("empirical", vec![(horizon, rep.empirical)])],
            ..Plot::default()
        },
    )
}

fn run_gumbel(a: GumbelArgs) -> Res {
    let out = Output::new(&a.common.out)?;
    let ga = gamma_alpha(a.d)?;
    let fit = gumbel_fit(a.d, &a.t, a.reps, a.common.seed, &ga)?;
    for r in &fit.rows {
        println!("gumbel: t={} KS {:.4} mean {:.4}", r.t, r.ks_distance, r.mean);
    }
    let mut flags = Vec::new();
    if !fit.ks_nonincreasing {
        flags.push("KS_NOT_DECREASING".to_string());
    }
    out.csv("gumbel.csv", &fit.rows)?;
    out.summary(
        "gumbel",
        a.common.seed,
        &to_value(&a),
        json!({"rows": fit.rows, "ks_nonincreasing": fit.ks_nonincreasing}),
        &flags,
    )?;
    let mut xs = fit.last_samples.clone();
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    let stride = (k / 400).max(1);
    let ecdf: Vec<(f64, f64)> = xs
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i + 1 == k)
        .map(|(i, &x)| (x, (i + 1) as f64 / k as f64))
        .collect();
    let reference = ecdf.iter().map(|&(x, _)| (x, gumbel_reference_cdf(x, ga.gamma))).collect();
    let last = fit.rows.last();
    plot(
        &a.common,
        &out,
        "gumbel.svg",
        Plot {
            title: format!("centred maximum at t = {}", last.map_or(0.0, |r| r.t)),
            x_label: "max local time - log(t)/gamma".into(),
            y_label: "CDF".into(),
            series: vec![Series::new("empirical", ecdf), Series::new("Gumbel limit", reference)],
            note: last.map(|r| format!("KS {:.4}", r.ks_distance)),
            ..Plot::default()
        },
    )
}

#[derive(Serialize)]
struct TraceRow {
    trace: u64,
    crossings: usize,
    returns: u64,
    in_b: bool,
    max_local_time: f64,
    target: f64,
    violated: bool,
}

#[derive(Serialize)]
struct BinRow {
    returns: String,
    count: u64,
    in_b: u64,
    empirical: f64,
    theory: f64,
    z: f64,
}

fn run_forcing(a: ForcingArgs) -> Res {
    let out = Output::new(&a.common.out)?;
    let ga = gamma_alpha(a.d)?;
    let p = ForcingParams {
        d: a.d,
        beta: a.beta,
        eta: a.eta,
        kappa: a.kappa,
        delta: a.delta,
        n: a.n,
    };
    p.validate(ga.gamma)?;
    let seed = a.common.seed;
    let sampled = sample_traces(&p, ga.gamma, a.traces, seed)?;
    let rows: Vec<TraceRow> = sampled
        .iter()
        .enumerate()
        .map(|(i, (t, c))| TraceRow {
            trace: i as u64,
            crossings: t.crossings.len(),
            returns: t.returns().iter().sum(),
            in_b: t.in_b,
            max_local_time: c.max_local_time,
            target: c.target,
            violated: c.violated,
        })
        .collect();
    let violated: Vec<u64> = rows.iter().filter(|r| r.violated).map(|r| r.trace).collect();
    let traces: Vec<ForcingTrace> = sampled.into_iter().map(|(t, _)| t).collect();
    let holding = holding_time_law_check(&traces).ok();
    let bins: Vec<BinRow> = product_formula_bins(&traces, p.eta, 30)
        .into_iter()
        .map(|b| BinRow {
            returns: b.returns.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(";"),
            count: b.count,
            in_b: b.in_b,
            empirical: b.empirical,
            theory: b.theory,
            z: b.z,
        })
        .collect();
    let weighted = if a.weighted_reps > 0 {
        let w = weighted_b_sampler(&p, ga.gamma, a.weighted_reps, seed.wrapping_add(1))?;
        let n = naive_b_probability(&p, ga.gamma, a.weighted_reps, seed.wrapping_add(2))?;
        let z = (w.value - n.value) / w.stderr.hypot(n.stderr);
        println!("forcing: P(B) weighted {:.4} +- {:.4}, naive {:.4} +- {:.4}", w.value, w.stderr, n.value, n.stderr);
        Some(json!({"weighted": w, "naive": n, "z": z}))
    } else {
        None
    };
    let in_b = rows.iter().filter(|r| r.in_b).count();
    let mut flags = Vec::new();
    match &holding {
        Some(h) if h.underpowered => flags.push("UNDERPOWERED".to_string()),
        None => flags.push("NO_CROSSINGS".to_string()),
        _ => {}
    }
    println!(
        "forcing: {} traces, {in_b} in B, {} inclusion violations, holding-time KS {}",
        rows.len(),
        violated.len(),
        holding.as_ref().map_or("n/a".into(), |h| format!("{:.4} ({} values)", h.ks_distance, h.samples))
    );
    out.csv("forcing.csv", &rows)?;
    out.csv("forcing_bins.csv", &bins)?;
    out.summary(
        "forcing",
        seed,
        &to_value(&a),
        json!({
            "n_hat": p.n_hat(),
            "lambda": p.lambda(ga.gamma),
            "target": p.target(ga.gamma),
            "traces": rows.len(),
            "in_b": in_b,
            "violations": violated,
            "holding_times": holding,
            "weighted": weighted,
        }),
        &flags,
    )?;
    plot(
        &a.common,
        &out,
        "forcing.svg",
        Plot {
            title: "P(B | returns) by bin".into(),
            x_label: "bin".into(),
            y_label: "probability".into(),
            series: vec![
                Series::new("empirical", bins.iter().enumerate().map(|(i, b)| (i as f64, b.empirical)).collect()),
                Series::new("product formula", bins.iter().enumerate().map(|(i, b)| (i as f64, b.theory)).collect()),
            ],
            ..Plot::default()
        },
    )?;
    if let Some(&first) = violated.first() {
        return Err(CliError::Invariant(format!(
            "inclusion of B in {{max local time <= target}} fails in {} trace(s), first {first}",
            violated.len()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SegmentRow {
    blocks_visiting: usize,
    sites: u64,
    fraction: f64,
}

fn run_segments(a: SegmentArgs) -> Res {
    let out = Output::new(&a.common.out)?;
    let p = SegmentParams {
        d: a.d,
        beta: a.beta,
        beta1: a.beta1,
        beta2: a.beta2,
        kappa: a.kappa,
        n: a.n,
    };
    p.validate()?;
    if a.reps == 0 {
        return Err(CliError::Usage("reps must be positive".into()));
    }
    let stats = segment_experiment(&p, a.reps, a.common.seed)?;
    let mut hist = Vec::<u64>::new();
    for s in &stats {
        if hist.len() < s.histogram.len() {
            hist.resize(s.histogram.len(), 0);
        }
        for (h, &c) in hist.iter_mut().zip(&s.histogram) {
            *h += c;
        }
    }
    let total: u64 = hist.iter().sum();
    let rows: Vec<SegmentRow> = hist
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| SegmentRow {
            blocks_visiting: k,
            sites: c,
            fraction: c as f64 / total as f64,
        })
        .collect();
    let maxima: Vec<u64> = stats.iter().map(|s| s.max).collect();
    let max = maxima.iter().copied().max().unwrap_or(0);
    let mean = maxima.iter().sum::<u64>() as f64 / maxima.len() as f64;
    println!(
        "segments: block length {}, {} blocks, max blocks per site {max} (mean of maxima {mean:.3})",
        p.block_length(),
        p.blocks()
    );
    out.csv("segments.csv", &rows)?;
    out.summary(
        "segments",
        a.common.seed,
        &to_value(&a),
        json!({"n_hat": p.n_hat(), "block_length": p.block_length(), "blocks": p.blocks(), "max": max, "mean_max": mean}),
        &[],
    )?;
    plot(
        &a.common,
        &out,
        "segments.svg",
        Plot {
            title: "blocks visiting a site".into(),
            x_label: "blocks".into(),
            y_label: "fraction of sites".into(),
            log_y: true,
            series: vec![Series::new("empirical", rows.iter().map(|r| (r.blocks_visiting as f64, r.fraction)).collect())],
            ..Plot::default()
        },
    )
}

fn run_resume(a: ResumeArgs) -> Res {
    let ckpt = Checkpoint::load(Path::new(&a.checkpoint))
        .map_err(|e| CliError::Usage(format!("cannot load checkpoint {}: {e}", a.checkpoint.display())))?;
    let command = ckpt.config.get("command").and_then(Value::as_str).unwrap_or_default().to_string();
    let args = ckpt.config.get("args").cloned().unwrap_or(Value::Null);
    let bad = |e: serde_json::Error| CliError::Usage(format!("checkpoint arguments are malformed: {e}"));
    let mut common = a.common.clone();
    common.seed = ckpt.frontier.seed;
    match command.as_str() {
        "count" => {
            let mut c: CountArgs = serde_json::from_value(args).map_err(bad)?;
            c.common = common;
            c.checkpoint = Some(a.checkpoint.clone());
            run_count(c, Some(ckpt))
        }
        "tail" => {
            let mut t: TailArgs = serde_json::from_value(args).map_err(bad)?;
            t.common = common;
            t.checkpoint = Some(a.checkpoint.clone());
            run_tail(t, Some(ckpt))
        }
        other => Err(CliError::Usage(format!("checkpoint is for {other:?}, which cannot be resumed"))),
    }
}
