use std::fs::File;
use std::io::BufWriter;
use std::time::Duration;

use anyhow::{Context, Result};
use lowprec_core::kernels::{bench_axpy, doubling_sizes, AxpyBenchConfig, TimingProtocol};
use lowprec_core::netbench::{
    channel_world, collective_bench, default_sizes, pingpong, MonotonicClock, NetBenchConfig,
    NetOp, ReduceOp, Repetitions,
};
use lowprec_core::precision_bench::{
    precision_sweep, SweepConfig, DEFAULT_HORIZON, HARDWARE_CAVEAT,
};
use lowprec_core::rng::DEFAULT_SEED;
use lowprec_core::sherlog::{MAX_EXPONENT, MIN_EXPONENT};
use lowprec_core::swm::{calibrate_scale, run_simulation, snapshot, SwmParams};
use lowprec_core::{Recorder, RoundingPolicy, ScalarKind};

use crate::config::{parse_grids, parse_list, parse_value, Config};
use crate::output::{csv_writer, host_info, opt, write_file};
use crate::svg::{heatmap, line_chart, Series};
use crate::{
    AxpyArgs, Cli, Command, ModelArgs, NetArgs, SherlogArgs, SherlogCommand, SwmBenchArgs,
    SwmCommand, SwmRunArgs, UsageError,
};

/// Steps of the binary32 probe run behind `--scale auto`.
const CALIBRATION_STEPS: usize = 100;

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.get("general.seed")?.unwrap_or(DEFAULT_SEED),
    };
    let policy = rounding_policy(&cli, &cfg)?;
    match cli.command {
        Command::AxpyBench(a) => axpy(&cfg, a, seed, policy),
        Command::Swm {
            command: SwmCommand::Run(a),
        } => swm_run(&cfg, a, seed, policy),
        Command::Swm {
            command: SwmCommand::Bench(a),
        } => swm_bench(&cfg, a, seed, policy),
        Command::Sherlog {
            command: SherlogCommand::Report(a),
        } => sherlog_report(&cfg, a, seed, policy),
        Command::Netbench(a) => netbench(&cfg, a, seed),
    }
}

/// Config file, then `HALF_FLUSH_SUBNORMALS`, then flags.
fn rounding_policy(cli: &Cli, cfg: &Config) -> Result<RoundingPolicy, UsageError> {
    let mut flush = cfg.get("fp16.flush_subnormals")?.unwrap_or(false);
    if let Ok(v) = std::env::var("HALF_FLUSH_SUBNORMALS") {
        flush = match v.trim() {
            "1" | "true" => true,
            "0" | "false" | "" => false,
            other => {
                return Err(UsageError(format!(
                    "HALF_FLUSH_SUBNORMALS must be 0 or 1, got `{other}`"
                )))
            }
        };
    }
    flush |= cli.flush_subnormals;
    let muladd = match cli.muladd {
        Some(m) => m,
        None => cfg.get("fp16.muladd")?.unwrap_or_default(),
    };
    Ok(RoundingPolicy::new(flush, muladd))
}

fn axpy(cfg: &Config, a: AxpyArgs, seed: u64, policy: RoundingPolicy) -> Result<()> {
    let kind = pick(a.kind, cfg.get("axpy.kind")?, ScalarKind::F64);
    let min_exp = pick(a.min_exp, cfg.get("axpy.min_exp")?, 4);
    let max_exp = pick(a.max_exp, cfg.get("axpy.max_exp")?, 24);
    if min_exp > max_exp || max_exp > 40 {
        return Err(UsageError(format!(
            "size exponents {min_exp}..{max_exp} are out of order or too large"
        ))
        .into());
    }
    let defaults = TimingProtocol::default();
    let protocol = TimingProtocol {
        warmup_calls: cfg.get("axpy.warmup")?.unwrap_or(defaults.warmup_calls),
        min_sample_time: a
            .min_sample_ms
            .or(cfg.get("axpy.min_sample_ms")?)
            .map_or(defaults.min_sample_time, Duration::from_millis),
        samples: pick(a.samples, cfg.get("axpy.samples")?, defaults.samples).max(1),
    };
    let bench = AxpyBenchConfig {
        protocol,
        seed,
        cold: a.cold || cfg.get("axpy.cold")?.unwrap_or(false),
        policy,
        ..Default::default()
    };
    eprintln!("{}", host_info());
    let report = bench_axpy(kind, &doubling_sizes(min_exp, max_exp), &bench)
        .map_err(|e| UsageError(e.to_string()))?;
    for (n, e) in &report.skipped {
        eprintln!("skipped size {n}: {e}");
    }
    let mut w = csv_writer(a.csv.as_deref())?;
    w.write_record(["kind", "size", "t_min_s", "t_median_s", "gflops"])?;
    for r in &report.records {
        w.write_record([
            r.kind.to_string(),
            r.size.to_string(),
            r.t_min.to_string(),
            r.t_median.to_string(),
            r.gflops().to_string(),
        ])?;
    }
    w.flush()?;
    if let Some(p) = &a.svg {
        let series = Series {
            label: kind.to_string(),
            points: report
                .records
                .iter()
                .map(|r| (r.size as f64, r.gflops()))
                .collect(),
        };
        write_file(
            p,
            line_chart("axpy, one thread", "vector length", "GFLOPS", &[series]).as_bytes(),
        )?;
    }
    Ok(())
}

fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

struct Model {
    params: SwmParams,
    kind: ScalarKind,
}

/// Defaults, then the config file, then flags.
fn model(
    cfg: &Config,
    a: &ModelArgs,
    seed: u64,
    kind_key: &str,
    default_kind: ScalarKind,
) -> Result<Model> {
    let kind = pick(a.kind, cfg.get(kind_key)?, default_kind);
    let base = SwmParams::default();
    let nx = pick(a.nx, cfg.get("swm.nx")?, base.nx);
    let ny = pick(a.ny, cfg.get("swm.ny")?, base.ny);
    let mut p = SwmParams::desk(nx, ny);
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = cfg.get(concat!("swm.", stringify!($field)))? {
                p.$field = v;
            }
        )*};
    }
    set!(
        lx,
        ly,
        g,
        depth,
        f0,
        beta,
        wind_amplitude,
        nu4,
        r_bottom,
        n_steps,
        nonlinear,
        compensated,
        perturbation,
        diag_every
    );
    p.dt = p.cfl_limit();
    if let Some(dt) = a.dt.or(cfg.get("swm.dt")?) {
        p.dt = dt;
    }
    if let Some(n) = a.steps {
        p.n_steps = n;
    }
    p.integration_kind = a.integration_kind.or(cfg.get("swm.integration_kind")?);
    p.nonlinear &= !a.linear;
    p.compensated &= !a.no_compensation;
    p.seed = seed;
    let scale = a.scale.as_deref().or(cfg.raw("swm.scale_s"));
    match scale {
        Some("auto") => {
            p.validate()?;
            p.scale_s = calibrate_scale(&p, CALIBRATION_STEPS)?;
            eprintln!("calibrated scale s = {}", p.scale_s);
        }
        Some(v) => p.scale_s = parse_value("scale", v)?,
        None => {}
    }
    p.validate()?;
    Ok(Model { params: p, kind })
}

fn swm_run(cfg: &Config, a: SwmRunArgs, seed: u64, policy: RoundingPolicy) -> Result<()> {
    let Model { mut params, kind } = model(cfg, &a.model, seed, "swm.kind", ScalarKind::F64)?;
    if let Some(d) = a.diag_every {
        params.diag_every = d;
        params.validate()?;
    }
    let out = run_simulation(&params, kind, policy, None)?;
    let mut w = csv_writer(a.csv.as_deref())?;
    w.write_record(["step", "t", "mean_eta", "mean_ke", "max_u"])?;
    for d in &out.diagnostics {
        w.write_record([
            d.step.to_string(),
            d.t.to_string(),
            d.mean_eta.to_string(),
            d.mean_ke.to_string(),
            d.max_u.to_string(),
        ])?;
    }
    w.flush()?;
    if let Some(p) = &a.snapshot {
        let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
        snapshot::write_fields(&mut BufWriter::new(f), &out.fields)
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    if let Some(p) = &a.svg {
        let title = format!("interface height (m), {kind}, t = {} s", out.t);
        write_file(
            p,
            heatmap(&title, params.nx, params.ny, out.fields.eta()).as_bytes(),
        )?;
    }
    Ok(())
}

fn swm_bench(cfg: &Config, a: SwmBenchArgs, seed: u64, policy: RoundingPolicy) -> Result<()> {
    let mut kinds: Vec<ScalarKind> = match a.kinds.as_deref().or(cfg.raw("bench.kinds")) {
        Some(v) => parse_list("kinds", v)?,
        None => ScalarKind::ALL.to_vec(),
    };
    if !kinds.contains(&ScalarKind::F64) {
        kinds.insert(0, ScalarKind::F64);
    }
    let defaults = SweepConfig::default();
    let sizes = match a.sizes.as_deref().or(cfg.raw("bench.sizes")) {
        Some(v) => parse_grids("sizes", v)?,
        None => defaults.sizes,
    };
    let base = model(
        cfg,
        &ModelArgs::default(),
        seed,
        "swm.kind",
        ScalarKind::F64,
    )?
    .params;
    let sweep = SweepConfig {
        base,
        kinds,
        sizes,
        horizon: pick(a.steps, cfg.get("bench.steps")?, DEFAULT_HORIZON),
        policy,
        parallel: a.parallel || cfg.get("bench.parallel")?.unwrap_or(false),
    };
    eprintln!("{}", host_info());
    eprintln!("note: {HARDWARE_CAVEAT}");
    let report = precision_sweep(&sweep)?;
    if !report.timings_reliable {
        eprintln!("warning: runs were concurrent; wall times and speedups are unreliable");
    }
    let mut w = csv_writer(a.csv.as_deref())?;
    w.write_record([
        "kind",
        "nx",
        "ny",
        "steps",
        "t_wall_s",
        "speedup",
        "rmse_eta",
        "comp_overhead",
        "status",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.kind.to_string(),
            r.nx.to_string(),
            r.ny.to_string(),
            r.steps.to_string(),
            opt(r.t_wall_s),
            opt(r.speedup),
            opt(r.rmse_eta),
            opt(r.comp_overhead),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    if let Some(p) = &a.svg {
        let series: Vec<Series> = sweep
            .kinds
            .iter()
            .map(|&k| Series {
                label: k.to_string(),
                points: report
                    .rows
                    .iter()
                    .filter(|r| r.kind == k)
                    .filter_map(|r| r.speedup.map(|s| ((r.nx * r.ny) as f64, s)))
                    .collect(),
            })
            .collect();
        let chart = line_chart("speedup over f64", "grid points", "speedup", &series);
        write_file(p, chart.as_bytes())?;
    }
    Ok(())
}

fn sherlog_report(cfg: &Config, a: SherlogArgs, seed: u64, policy: RoundingPolicy) -> Result<()> {
    let Model { params, kind } = model(cfg, &a.model, seed, "sherlog.kind", ScalarKind::F32)?;
    let recorder = Recorder::new();
    run_simulation(&params, kind, policy, Some(&recorder))?;
    let h = recorder.take();
    let mut w = csv_writer(a.csv.as_deref())?;
    w.write_record(["exponent", "count"])?;
    for e in MIN_EXPONENT..=MAX_EXPONENT {
        w.write_record([e.to_string(), h.bin(e).to_string()])?;
    }
    w.write_record(["zero".to_string(), h.zero_count().to_string()])?;
    w.write_record(["inf".to_string(), h.inf_count().to_string()])?;
    w.write_record(["nan".to_string(), h.nan_count().to_string()])?;
    w.flush()?;
    let suggestion = h.suggest_scale().map_err(|e| UsageError(e.to_string()))?;
    eprintln!(
        "kind={kind} s={} total={} subnormal_fraction={} suggest_scale={suggestion}",
        params.scale_s,
        h.total(),
        h.f16_subnormal_fraction()
    );
    Ok(())
}

fn netbench(cfg: &Config, a: NetArgs, seed: u64) -> Result<()> {
    let op = pick(a.op, cfg.get("netbench.op")?, NetOp::PingPong);
    let ranks = pick(a.ranks, cfg.get("netbench.ranks")?, 2);
    let msg_sizes = match a.sizes.as_deref().or(cfg.raw("netbench.sizes")) {
        Some(v) => parse_list("sizes", v)?,
        None => default_sizes(),
    };
    let defaults = NetBenchConfig::default();
    let bench = NetBenchConfig {
        msg_sizes,
        warmup_iters: pick(a.warmup, cfg.get("netbench.warmup")?, defaults.warmup_iters),
        repetitions: a
            .reps
            .or(cfg.get("netbench.reps")?)
            .map_or(Repetitions::Imb, Repetitions::Fixed),
        cache_avoidance: a.cache_avoidance || cfg.get("netbench.cache_avoidance")?.unwrap_or(false),
        seed,
    };
    if op == NetOp::PingPong && ranks != 2 {
        return Err(UsageError(format!("pingpong runs on exactly 2 ranks, got {ranks}")).into());
    }
    if !(2..=1024).contains(&ranks) {
        return Err(UsageError(format!("--ranks must be between 2 and 1024, got {ranks}")).into());
    }
    eprintln!("{}", host_info());
    let rows = if op == NetOp::PingPong {
        let mut w = channel_world(2);
        let t1 = w.pop().expect("two ranks");
        let t0 = w.pop().expect("two ranks");
        pingpong(t0, t1, &bench, &MonotonicClock::new())?
    } else {
        collective_bench(op, channel_world(ranks), &ReduceOp::Sum, &bench, |_| {
            MonotonicClock::new()
        })?
    };
    let mut w = csv_writer(a.csv.as_deref())?;
    w.write_record([
        "op",
        "ranks",
        "size_bytes",
        "t_min_us",
        "t_avg_us",
        "t_max_us",
        "throughput_MBps",
    ])?;
    for r in &rows {
        w.write_record([
            r.op.to_string(),
            r.ranks.to_string(),
            r.size_bytes.to_string(),
            r.t_min_us.to_string(),
            r.t_avg_us.to_string(),
            r.t_max_us.to_string(),
            opt(r.throughput_mbps),
        ])?;
    }
    w.flush()?;
    Ok(())
}
