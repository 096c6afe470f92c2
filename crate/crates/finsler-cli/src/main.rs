//! Command-line front end: metric loading, identity verification,
//! classification, geodesic flow runs, and report emission.
//!
//! Exit codes are a stable contract: 0 success, 1 identity violation,
//! 2 usage or configuration error, 3 metric evaluation error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use finsler::classify::{classify, theorem_probe, ProbeResult, Verdict, DEFAULT_THRESHOLD, THEOREM_IDS};
use finsler::flow::{first_integral_report, integrate_geodesic, trajectory_csv, Monitor};
use finsler::identities::{identity_ids, run_suite, to_csv, tolerance_for};
use finsler::metric::{catalog, MetricSpec, TangentPoint};
use finsler::sample::sample_points;
use finsler::{builtin, extract_invariants, Error};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "finsler", version, about = "2-D Finsler geometry toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the builtin metric catalog.
    Catalog,
    /// Invariants 𝓘, 𝓙, K, ρ, 𝓕 and the frame-derivative table at sample points.
    Invariants(RunArgs),
    /// Run the full identity suite; exit 1 if any identity fails.
    Verify(RunArgs),
    /// Classification flags and theorem probes.
    Classify(ClassifyArgs),
    /// Integrate a geodesic and monitor first integrals.
    Flow(FlowArgs),
}

#[derive(Args)]
struct MetricArgs {
    /// Builtin metric name (see `catalog`).
    #[arg(long, conflicts_with = "metric_file")]
    metric: Option<String>,
    /// Metric definition file (key = value lines).
    #[arg(long)]
    metric_file: Option<PathBuf>,
    /// Parameter override, repeatable: --param b=0.5
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    metric: MetricArgs,
    /// Number of sample points.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the machine report here (JSON unless --csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Classification threshold on dimensionless statistics.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    metric: MetricArgs,
    /// Base point, comma-separated: --x 0.1,0
    #[arg(long, value_parser = parse_pair)]
    x: (f64, f64),
    /// Fiber vector: --y 1,0
    #[arg(long, value_parser = parse_pair)]
    y: (f64, f64),
    /// Integration time.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Step size.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Monitor stride: run the frame pipeline every N-th step.
    #[arg(long, default_value_t = 10)]
    sample_every: usize,
    /// Write the trajectory CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let val: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("invalid numeric value `{v}`"))?;
    Ok((k.trim().to_string(), val))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated numbers, got `{s}`"))?;
    let pa: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let pb: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    Ok((pa, pb))
}

/// Exit-code classification of library errors: configuration problems are
/// exit 2, evaluation problems (domain, degeneracy, non-finite) exit 3.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::MetricFile { .. }
        | Error::UnknownMetric(_)
        | Error::UnknownParameter(_)
        | Error::InvalidParameter(_)
        | Error::UnknownIdentifier(_)
        | Error::UnknownTheorem(_)
        | Error::StepUnderflow => 2,
        _ => 3,
    }
}

fn load_metric(args: &MetricArgs) -> Result<MetricSpec, Error> {
    let overrides: BTreeMap<String, f64> = args.params.iter().cloned().collect();
    if let Some(path) = &args.metric_file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::MetricFile {
            line: 0,
            message: e.to_string(),
        })?;
        let mut spec = MetricSpec::from_definition(&text)?;
        for (k, v) in overrides {
            if !spec.params.contains_key(&k) {
                return Err(Error::UnknownParameter(k));
            }
            spec.params.insert(k, v);
        }
        spec.validate()?;
        Ok(spec)
    } else {
        let name = args.metric.as_deref().unwrap_or("euclidean");
        builtin(name, &overrides)
    }
}

#[derive(Serialize)]
struct ReportEnvelope<T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: BTreeMap<String, String>,
    tolerances: BTreeMap<String, f64>,
    report: T,
}

fn envelope<T: Serialize>(config: BTreeMap<String, String>, report: T) -> ReportEnvelope<T> {
    let tolerances = identity_ids()
        .into_iter()
        .map(|id| {
            let t = tolerance_for(&id);
            (id, t)
        })
        .collect();
    ReportEnvelope {
        tool: "finsler",
        version: VERSION,
        config,
        tolerances,
        report,
    }
}

fn write_out(path: &PathBuf, content: &str) -> Result<(), String> {
    std::fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run_config(spec: &MetricSpec, args: &RunArgs) -> BTreeMap<String, String> {
    let mut c = BTreeMap::new();
    c.insert("metric".into(), spec.name.clone());
    c.insert("points".into(), args.points.to_string());
    c.insert("seed".into(), args.seed.to_string());
    for (k, v) in &spec.params {
        c.insert(format!("param.{k}"), v.to_string());
    }
    c
}

fn cmd_invariants(args: &RunArgs) -> Result<u8, (u8, String)> {
    let spec = load_metric(&args.metric).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let points = sample_points(&spec, args.seed, args.points);
    #[derive(Serialize)]
    struct Row {
        index: usize,
        point: TangentPoint,
        invariants: finsler::InvariantSet,
    }
    let mut rows = Vec::new();
    for (index, p) in points.iter().enumerate() {
        let invariants =
            extract_invariants(&spec, p).map_err(|e| (exit_code_for(&e), e.to_string()))?;
        rows.push(Row {
            index,
            point: *p,
            invariants,
        });
    }
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).sum::<f64>() / n;
    println!("metric: {}  points: {}  seed: {}", spec.name, args.points, args.seed);
    println!(
        "mean K = {:+.6}   max|I| = {:.3e}   max|J| = {:.3e}   max|F| = {:.3e}",
        mean(&|r| r.invariants.k),
        rows.iter().map(|r| r.invariants.i.abs()).fold(0.0, f64::max),
        rows.iter().map(|r| r.invariants.j.abs()).fold(0.0, f64::max),
        rows.iter().map(|r| r.invariants.fscal.abs()).fold(0.0, f64::max),
    );
    if let Some(out) = &args.out {
        let content = if args.csv {
            let mut s = String::from(
                "index,x1,x2,y1,y2,I,J,K,rho,Fscal,s_i,v_i,h_i,s_j,v_j,h_j,s_rho,v_rho,h_rho,v2_rho,s_fscal\n",
            );
            for r in &rows {
                let i = &r.invariants;
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.index, r.point.x[0], r.point.x[1], r.point.y[0], r.point.y[1],
                    i.i, i.j, i.k, i.rho, i.fscal, i.s_i, i.v_i, i.h_i, i.s_j, i.v_j,
                    i.h_j, i.s_rho, i.v_rho, i.h_rho, i.v2_rho, i.s_fscal
                ));
            }
            s
        } else {
            serde_json::to_string_pretty(&envelope(run_config(&spec, args), &rows)).unwrap()
        };
        write_out(out, &content).map_err(|m| (2, m))?;
        println!("report written to {}", out.display());
    }
    Ok(0)
}

fn cmd_verify(args: &RunArgs) -> Result<u8, (u8, String)> {
    let spec = load_metric(&args.metric).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let points = sample_points(&spec, args.seed, args.points);
    // surface evaluation errors as exit 3 before running the tolerant suite
    finsler::metric::MetricEval::new(&spec, &points[0], 3)
        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let report = run_suite(&spec, &points, args.seed);
    println!(
        "metric: {}  points: {}  seed: {}",
        spec.name, args.points, args.seed
    );
    let mut worst: Option<(&String, f64)> = None;
    for (id, s) in &report.identities {
        if !s.pass {
            println!("FAIL {id}: max residual {:.3e}", s.max_residual);
        }
        if worst.map_or(true, |(_, w)| s.max_residual > w) {
            worst = Some((id, s.max_residual));
        }
    }
    if let Some((id, w)) = worst {
        println!("worst residual: {id} at {w:.3e}");
    }
    println!(
        "{} identities x {} points: {}",
        report.identities.len(),
        report.points.len(),
        if report.all_pass { "all pass" } else { "FAILURES" }
    );
    if let Some(out) = &args.out {
        let content = if args.csv {
            to_csv(&report)
        } else {
            serde_json::to_string_pretty(&envelope(run_config(&spec, args), &report)).unwrap()
        };
        write_out(out, &content).map_err(|m| (2, m))?;
        println!("report written to {}", out.display());
    }
    Ok(if report.all_pass { 0 } else { 1 })
}

fn cmd_classify(args: &ClassifyArgs) -> Result<u8, (u8, String)> {
    let spec = load_metric(&args.run.metric).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let points = sample_points(&spec, args.run.seed, args.run.points);
    let classification = classify(&spec, &points, args.run.seed, args.threshold);
    if classification.points_used == 0 {
        let msg = classification
            .errors
            .first()
            .cloned()
            .unwrap_or_else(|| "no usable sample points".into());
        return Err((3, msg));
    }
    let mut probes: Vec<ProbeResult> = Vec::new();
    for id in THEOREM_IDS {
        let p = theorem_probe(&spec, id, &points, args.threshold)
            .map_err(|e| (exit_code_for(&e), e.to_string()))?;
        probes.push(p);
    }
    println!("metric: {}  points: {}", spec.name, classification.points_used);
    for (name, fs) in &classification.flags {
        println!("  {name:12} {}   (stat {:.3e})", fs.flag, fs.statistic);
    }
    let mut violation = false;
    for p in &probes {
        println!("  probe {:8} {:?}", p.theorem, p.verdict);
        violation |= p.verdict == Verdict::Violation;
    }
    if let Some(out) = &args.run.out {
        #[derive(Serialize)]
        struct ClassifyReport {
            classification: finsler::classify::Classification,
            probes: Vec<ProbeResult>,
        }
        let mut config = run_config(&spec, &args.run);
        config.insert("threshold".into(), args.threshold.to_string());
        let content = serde_json::to_string_pretty(&envelope(
            config,
            ClassifyReport {
                classification,
                probes,
            },
        ))
        .unwrap();
        write_out(out, &content).map_err(|m| (2, m))?;
        println!("report written to {}", out.display());
    }
    Ok(if violation { 1 } else { 0 })
}

fn cmd_flow(args: &FlowArgs) -> Result<u8, (u8, String)> {
    let spec = load_metric(&args.metric).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let p0 = TangentPoint::new([args.x.0, args.x.1], [args.y.0, args.y.1])
        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let traj = integrate_geodesic(&spec, &p0, args.t, args.dt, args.sample_every)
        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
    println!(
        "metric: {}  t = {}  dt = {}  samples: {}{}",
        spec.name,
        args.t,
        args.dt,
        traj.samples.len(),
        if traj.clipped { "  (clipped at domain boundary)" } else { "" }
    );
    for m in [Monitor::F, Monitor::K, Monitor::J, Monitor::Fscal] {
        let r = first_integral_report(&traj, m);
        println!(
            "  {:5} initial {:+.6e}  max drift {:.3e}",
            r.scalar, r.initial, r.max_drift
        );
    }
    if let Some(out) = &args.out {
        write_out(out, &trajectory_csv(&traj)).map_err(|m| (2, m))?;
        println!("trajectory written to {}", out.display());
    }
    Ok(0)
}

fn cmd_catalog() -> u8 {
    for e in catalog() {
        let params: Vec<String> = e
            .parameters
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        println!("{:14} F = {}", e.name, e.expression);
        println!("{:14}   {}", "", e.description);
        if !params.is_empty() {
            println!("{:14}   parameters: {}", "", params.join(", "));
        }
    }
    0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Catalog => Ok(cmd_catalog()),
        Command::Invariants(a) => cmd_invariants(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Flow(a) => cmd_flow(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
