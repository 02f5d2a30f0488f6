//! `deltamass`: point-mass certification, network moments, interpolation and
//! oracle checks from the command line.
//!
//! Exit codes: 0 success, 1 oracle failure, 2 input error.

mod points;

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use deltamass::moments::{moment_identity_check, mu_a_moments, mu_b_moments, IdentityCheck, MomentReport};
use deltamass::report::write_trace_csv;
use deltamass::sampling::frame_lower_bound;
use deltamass::{
    energy_kernel, interpolate, load_network, membership_scan, network_moments, parse_edge_list, run_oracle_suite,
    BuiltinKernelId, Kernel, KernelSpec, MembershipReport, NetworkMoments, Point, PointConfiguration, SampleSet,
    ScanPolicy, SuiteOptions,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "deltamass", version, about = "Point masses in discrete reproducing kernel Hilbert spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan ‖P_F δ_x‖² along the filtration and report a verdict per target
    Membership(PointArgs),
    /// Closed-form moments of every vertex of a weighted graph
    Network(NetworkArgs),
    /// μ^(A) and μ^(B) moments and their identity per target
    Moments(PointArgs),
    /// Reconstruct f from δ-pairings on a sample set
    Interpolate(InterpolateArgs),
    /// Run every closed-form oracle against the engine
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, default_value_t = 200)]
    max_n: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    /// Divergence cap on ‖P_F δ_x‖²
    #[arg(long, default_value_t = 1e12)]
    cap: f64,
}

impl PolicyArgs {
    fn policy(&self) -> Result<ScanPolicy> {
        let p = ScanPolicy {
            max_n: self.max_n,
            window: self.window,
            rel_tol: self.rel_tol,
            divergence_cap: self.cap,
            ..ScanPolicy::default()
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct PointArgs {
    /// Builtin kernel id or path to a JSON kernel spec
    #[arg(long)]
    kernel: String,
    /// Point list, range, generator or file; overrides points in a spec.
    /// Generators produce `--max-n` points
    #[arg(long)]
    points: Option<String>,
    /// Comma-separated target points, or `all`
    #[arg(long, default_value = "all")]
    target: String,
    /// Directory for per-target trace CSV files
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct NetworkArgs {
    /// Edge list, one `u v c` per line
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    base: String,
    /// Comma-separated vertex labels, or `all`
    #[arg(long, default_value = "all")]
    target: String,
    /// Write the energy kernel on V \ {o} as CSV
    #[arg(long)]
    export_kernel: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct InterpolateArgs {
    /// JSON input with `kernel`, `samples`, `pairings` and optional `grid`
    #[arg(long)]
    input: PathBuf,
    /// CSV of `x,value` over the grid
    #[arg(long)]
    grid_out: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Comma-separated formula ids; all when absent
    #[arg(long)]
    formula: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative error injected into every engine value
    #[arg(long, default_value_t = 0.0, hide = true)]
    perturb: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Membership(a) => cmd_membership(&a),
        Command::Network(a) => cmd_network(&a),
        Command::Moments(a) => cmd_moments(&a),
        Command::Interpolate(a) => cmd_interpolate(&a),
        Command::OracleCheck(a) => cmd_oracle_check(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_kernel(kernel: &str) -> Result<(Box<dyn Kernel>, Option<PointConfiguration>)> {
    if let Ok(id) = kernel.parse::<BuiltinKernelId>() {
        return Ok((deltamass::make_kernel(id)?, None));
    }
    let text = fs::read_to_string(kernel).with_context(|| format!("{kernel:?} is neither a builtin kernel nor a readable spec"))?;
    Ok(KernelSpec::from_json(&text)?.load()?)
}

fn load_points(args: &PointArgs) -> Result<(Box<dyn Kernel>, PointConfiguration)> {
    let (kernel, spec_config) = load_kernel(&args.kernel)?;
    let config = match (&args.points, spec_config) {
        (Some(p), _) => {
            let xs = points::parse_points(p, args.policy.max_n)?;
            PointConfiguration::from_reals(&xs, true)?
        }
        (None, Some(c)) => c,
        (None, None) => bail!("no points: pass --points or a spec with \"points\""),
    };
    kernel.check_points(config.points())?;
    Ok((kernel, config))
}

fn parse_targets(target: &str, config: &PointConfiguration) -> Result<Vec<Point>> {
    if target.trim() == "all" {
        return Ok(config.points().to_vec());
    }
    let labels = config.point(0).as_label().is_some();
    target
        .split(',')
        .map(|t| {
            let t = t.trim();
            let p = if labels {
                Point::Label(t.parse().with_context(|| format!("bad label {t:?}"))?)
            } else {
                Point::Real(t.parse().with_context(|| format!("bad target {t:?}"))?)
            };
            if config.index_of(p).is_none() {
                bail!("target {t} is not a configuration point");
            }
            Ok(p)
        })
        .collect()
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<T: Serialize>(output: &OutputArgs, rows: &[T]) -> Result<()> {
    let mut w = writer(&output.out)?;
    match output.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            for r in rows {
                c.serialize(r)?;
            }
            c.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MembershipRow {
    point: String,
    verdict: &'static str,
    estimate: Option<f64>,
    steps: usize,
    plateau_n: Option<usize>,
    breakdown_n: Option<usize>,
    trace_file: Option<String>,
}

fn cmd_membership(args: &PointArgs) -> Result<ExitCode> {
    let (kernel, config) = load_points(args)?;
    let policy = args.policy.policy()?;
    let targets = parse_targets(&args.target, &config)?;
    if let Some(dir) = &args.trace_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let traces = targets
        .par_iter()
        .map(|&x| membership_scan(kernel.as_ref(), &config, x, &policy))
        .collect::<deltamass::Result<Vec<_>>>()?;
    let mut reports = Vec::new();
    for (x, trace) in targets.iter().zip(&traces) {
        let mut r = MembershipReport::from_trace(x.to_string(), trace);
        if let Some(dir) = &args.trace_dir {
            let path = dir.join(format!("trace_{}.csv", trace.target_index));
            write_trace_csv(trace, File::create(&path)?)?;
            r.trace_file = Some(path.display().to_string());
        }
        reports.push(r);
    }
    match args.output.format {
        Format::Json => emit(&args.output, &reports)?,
        Format::Csv => {
            let rows: Vec<MembershipRow> = reports
                .into_iter()
                .map(|r| MembershipRow {
                    point: r.point,
                    verdict: r.verdict.label(),
                    estimate: r.estimate.is_finite().then_some(r.estimate),
                    steps: r.steps,
                    plateau_n: r.plateau_n,
                    breakdown_n: r.breakdown_n,
                    trace_file: r.trace_file,
                })
                .collect();
            emit(&args.output, &rows)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_network(args: &NetworkArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.edges).with_context(|| format!("cannot read {}", args.edges.display()))?;
    let graph = load_network(&parse_edge_list(&text)?, &args.base)?;
    let vertices: Vec<usize> = if args.target.trim() == "all" {
        graph.non_base_vertices()
    } else {
        args.target
            .split(',')
            .map(|l| graph.vertex(l.trim()).map_err(Into::into))
            .collect::<Result<_>>()?
    };
    let rows = vertices
        .iter()
        .map(|&v| network_moments(&graph, v))
        .collect::<deltamass::Result<Vec<NetworkMoments>>>()?;
    if let Some(path) = &args.export_kernel {
        export_kernel(&graph, path)?;
    }
    emit(&args.output, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn export_kernel(graph: &deltamass::NetworkGraph, path: &Path) -> Result<()> {
    let k = energy_kernel(graph)?;
    let verts = graph.non_base_vertices();
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut header = vec![String::new()];
    header.extend(verts.iter().map(|&v| graph.label(v).to_string()));
    w.write_record(&header)?;
    for &x in &verts {
        let mut rec = vec![graph.label(x).to_string()];
        rec.extend(verts.iter().map(|&y| k.green()[(x, y)].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct MomentRow {
    point: String,
    mu_a: MomentReport,
    mu_b: MomentReport,
    identity: IdentityCheck,
}

#[derive(Serialize)]
struct MomentCsvRow {
    point: String,
    a_m0: f64,
    a_m1: Option<f64>,
    a_m2: Option<f64>,
    a_covariance: Option<f64>,
    b_m0: f64,
    b_m1: Option<f64>,
    b_m2: Option<f64>,
    identity_rel_err: Option<f64>,
    identity_pass: bool,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn cmd_moments(args: &PointArgs) -> Result<ExitCode> {
    let (kernel, config) = load_points(args)?;
    let policy = args.policy.policy()?;
    let targets = parse_targets(&args.target, &config)?;
    let k = kernel.as_ref();
    let rows = targets
        .par_iter()
        .map(|&x| {
            Ok(MomentRow {
                point: x.to_string(),
                mu_a: mu_a_moments(k, &config, x, &policy)?,
                mu_b: mu_b_moments(k, &config, x, &policy)?,
                identity: moment_identity_check(k, &config, x, &policy, 1e-8)?,
            })
        })
        .collect::<deltamass::Result<Vec<_>>>()?;
    match args.output.format {
        Format::Json => emit(&args.output, &rows)?,
        Format::Csv => {
            let flat: Vec<MomentCsvRow> = rows
                .into_iter()
                .map(|r| MomentCsvRow {
                    point: r.point,
                    a_m0: r.mu_a.m0,
                    a_m1: finite(r.mu_a.m1),
                    a_m2: finite(r.mu_a.m2),
                    a_covariance: finite(r.mu_a.covariance),
                    b_m0: r.mu_b.m0,
                    b_m1: finite(r.mu_b.m1),
                    b_m2: finite(r.mu_b.m2),
                    identity_rel_err: finite(r.identity.rel_err),
                    identity_pass: r.identity.pass,
                })
                .collect();
            emit(&args.output, &flat)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct InterpolateInput {
    kernel: KernelSpec,
    samples: Vec<usize>,
    pairings: Vec<f64>,
    #[serde(default)]
    grid: Vec<f64>,
}

#[derive(Serialize)]
struct InterpolateOutput {
    #[serde(flatten)]
    result: deltamass::Interpolation,
    /// Frame bound on the sampled prefix `F_n`, `n = max(S) + 1`.
    frame_bound: f64,
}

fn cmd_interpolate(args: &InterpolateArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let input: InterpolateInput = serde_json::from_str(&text).context("bad interpolate input")?;
    let (kernel, config) = input.kernel.load()?;
    let config = config.context("kernel spec needs \"points\"")?;
    let policy = args.policy.policy()?;
    let sample = SampleSet::new(input.samples, &config)?;
    let result = interpolate(kernel.as_ref(), &config, &sample, &input.pairings, &policy)?;
    let frame_bound = frame_lower_bound(kernel.as_ref(), &config, &sample, sample.max_index() + 1, policy.eps_pd)?;
    if let Some(path) = &args.grid_out {
        let labels = config.point(0).as_label().is_some();
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(["x", "value"])?;
        let values: Vec<f64> = input
            .grid
            .par_iter()
            .map(|&x| {
                let p = if labels { Point::Label(x as usize) } else { Point::Real(x) };
                result.expansion.eval(kernel.as_ref(), p)
            })
            .collect();
        for (x, v) in input.grid.iter().zip(values) {
            w.write_record([x.to_string(), v.to_string()])?;
        }
        w.flush()?;
    }
    let out = InterpolateOutput { result, frame_bound };
    let mut w = writer(&args.output.out)?;
    serde_json::to_writer_pretty(&mut w, &out)?;
    writeln!(w)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle_check(args: &OracleArgs) -> Result<ExitCode> {
    let filter = args
        .formula
        .as_deref()
        .map(|f| f.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        .unwrap_or_default();
    let opts = SuiteOptions { filter, seed: args.seed, perturb: args.perturb };
    let results = run_oracle_suite(&opts)?;
    let ok = results.iter().all(|r| r.pass);
    match (args.output.format, &args.output.out) {
        (Format::Json, Some(_)) | (Format::Csv, _) => emit(&args.output, &results)?,
        (Format::Json, None) => {
            for r in &results {
                println!(
                    "{:<4} {} max_rel_err={:.3e} tol={:.0e} samples={}",
                    r.formula,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.max_rel_err,
                    r.tolerance,
                    r.samples
                );
            }
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
