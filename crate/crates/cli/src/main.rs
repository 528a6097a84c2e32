// SPDX-License-Identifier: MIT OR Apache-2.0

//! `adscp`: change-point testing, localisation and reduction for functional
//! data stored as CSV.
//!
//! Exit codes: 0 success, 2 data or usage errors, 3 degenerate statistics,
//! 4 no change signal (`reduce` only).

mod io;
mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ads_changepoint::ads::{default_ridge, fit_ads, TrrParams};
use ads_changepoint::basis::FunctionalSample;
use ads_changepoint::cptest::ads_test;
use ads_changepoint::mpulse::{default_c_tilde, default_window, detect, MpulseParams, ZeroDimension};
use ads_changepoint::simlab::{gen_sequence, simulation_table, run_scenario_grid, Noise, ReportRow, SimConfig};
use ads_changepoint::AdsError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Ads(#[from] AdsError),
    #[error("no change signal: the dimension rule selected q_hat = 0")]
    NoSignal,
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        CliError::Parse { line, msg: msg.into() }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Ads(e) if e.is_degenerate() => 3,
            CliError::NoSignal => 4,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "adscp", version, about = "Change-point analysis for functional data via the adjacent deviation subspace")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic coefficient sequence and its ground truth.
    Simulate(SimulateArgs),
    /// Project raw curves onto the Fourier basis and write coefficients.
    Project(ProjectArgs),
    /// Split-sample test for the existence of mean changes.
    Test(TestArgs),
    /// Locate change points with the MPULSE scan.
    Detect(DetectArgs),
    /// Estimate the ADS and write the reduced sequence.
    Reduce(ReduceArgs),
    /// Run a simulation table and write the report.
    Bench(BenchArgs),
    /// Rerun the command recorded in a manifest (or a JSON output embedding one).
    Replay { manifest: PathBuf },
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Coefficient CSV (header c1..cD), or a raw-grid CSV when --smooth is given.
    input: PathBuf,
    /// Treat the input as raw curves on a grid (first row `t,...`) and project
    /// them by least squares onto D Fourier functions (D odd).
    #[arg(long, value_name = "D")]
    smooth: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Last index of each segment but the final one.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    change_points: Vec<usize>,
    /// Shift size per coordinate.
    #[arg(long, default_value_t = 0.1)]
    u: f64,
    /// Number of shifted leading coordinates.
    #[arg(long, default_value_t = 20)]
    support: usize,
    /// gaussian or t4.
    #[arg(long, default_value = "gaussian")]
    noise: Noise,
    #[arg(long, default_value_t = SimConfig::DEFAULT_BASIS_DIM)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coefficient CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth JSON (default: OUT with extension `.truth.json`).
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// Raw-grid CSV.
    input: PathBuf,
    #[arg(long, value_name = "D")]
    smooth: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// JSON output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrrArgs {
    /// TRR threshold.
    #[arg(long)]
    tau1: Option<f64>,
    /// TRR ridge (default 0.5 ln(ln n)/sqrt(n)).
    #[arg(long)]
    c_n: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ZeroDim {
    LeadingDirection,
    NoChange,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    trr: TrrArgs,
    /// MOSUM window (default floor(n^0.6)).
    #[arg(long)]
    alpha_n: Option<usize>,
    /// Scan threshold.
    #[arg(long)]
    tau2: Option<f64>,
    /// Scan ridge (default 0.25 sqrt(ln n / alpha_n)).
    #[arg(long)]
    c_tilde: Option<f64>,
    /// Behaviour when the dimension rule selects zero directions.
    #[arg(long, value_enum, default_value = "leading-direction")]
    zero_dimension: ZeroDim,
    /// Write the scan statistic as CSV (columns i,S).
    #[arg(long, value_name = "FILE")]
    emit_s: Option<PathBuf>,
    /// JSON output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    trr: TrrArgs,
    /// Reduced-sequence CSV (columns f1..fq).
    #[arg(long)]
    out: PathBuf,
    /// Model JSON (eigenvalues, q_hat, eigenvectors, reduced).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Eigenvalue scree CSV (columns k,eigenvalue,ratio).
    #[arg(long)]
    scree: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Simulation table 1-4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    table: u8,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV report (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(cli.command, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adscp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, args: &[String]) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate(a, args),
        Command::Project(a) => project_cmd(a, args),
        Command::Test(a) => test(a, args),
        Command::Detect(a) => detect_cmd(a, args),
        Command::Reduce(a) => reduce(a, args),
        Command::Bench(a) => bench(a, args),
        Command::Replay { manifest } => replay(&manifest),
    }
}

fn replay(path: &Path) -> Result<(), CliError> {
    let m = RunManifest::load(path)?;
    if m.version != env!("CARGO_PKG_VERSION") {
        eprintln!("adscp: manifest written by version {}, replaying with {}", m.version, env!("CARGO_PKG_VERSION"));
    }
    let cli = Cli::try_parse_from(std::iter::once("adscp".to_string()).chain(m.args.iter().cloned()))
        .map_err(|e| CliError::Usage(format!("manifest arguments do not parse: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(CliError::Usage("a manifest cannot record another replay".into()));
    }
    run(cli.command, &m.args)
}

fn write_sidecar(csv: &Path, m: &RunManifest) -> Result<(), CliError> {
    io::write_text(&RunManifest::sidecar(csv), &to_json(&json!(m)))
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn emit_json(out: Option<&Path>, mut body: Value, m: &RunManifest) -> Result<(), CliError> {
    body["manifest"] = json!(m);
    let text = to_json(&body);
    match out {
        Some(p) => io::write_text(p, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn base_manifest(command: &str, args: &[String], input: Option<&InputArgs>) -> RunManifest {
    let mut m = RunManifest::new(command, args);
    if let Some(i) = input {
        m.inputs.push(i.input.clone());
    }
    m
}

fn load(input: &InputArgs) -> Result<FunctionalSample, CliError> {
    io::load_sample(&input.input, input.smooth)
}

fn trr_params(a: &TrrArgs, n: usize) -> Result<TrrParams, CliError> {
    let ridge = match a.c_n {
        Some(c) => c,
        None => default_ridge(n)?,
    };
    Ok(TrrParams::new(a.tau1.unwrap_or(TrrParams::DEFAULT_TAU1), ridge)?)
}

fn simulate(a: SimulateArgs, args: &[String]) -> Result<(), CliError> {
    let mut cfg = SimConfig {
        n: a.n,
        basis_dim: a.dim,
        change_points: a.change_points.clone(),
        u: a.u,
        support: a.support,
        noise: a.noise,
        seed: a.seed,
    };
    // `--change-points ''` or `0` alone means no change.
    cfg.change_points.retain(|&z| z != 0);
    cfg.validate()?;
    let sample = gen_sequence(&cfg)?;
    let truth_path = a.truth.clone().unwrap_or_else(|| a.out.with_extension("truth.json"));

    let mut m = base_manifest("simulate", args, None);
    m.outputs = vec![a.out.clone(), truth_path.clone()];
    m.params = json!(cfg);
    m.seed = Some(a.seed);

    io::write_coefficients(&a.out, &sample)?;
    write_sidecar(&a.out, &m)?;
    let truth = cfg.ground_truth();
    let body = json!({
        "n": truth.n,
        "change_points": truth.change_points,
        "segmentation": truth.segmentation(),
        "config": cfg,
    });
    emit_json(Some(&truth_path), body, &m)
}

fn project_cmd(a: ProjectArgs, args: &[String]) -> Result<(), CliError> {
    let sample = io::load_sample(&a.input, Some(a.smooth))?;
    let mut m = RunManifest::new("project", args);
    m.inputs.push(a.input.clone());
    m.outputs.push(a.out.clone());
    m.params = json!({ "smooth": a.smooth });
    io::write_coefficients(&a.out, &sample)?;
    write_sidecar(&a.out, &m)
}

fn test(a: TestArgs, args: &[String]) -> Result<(), CliError> {
    let sample = load(&a.input)?;
    let res = ads_test(&sample, a.level)?;
    let mut m = base_manifest("test", args, Some(&a.input));
    m.outputs.extend(a.out.clone());
    m.params = json!({ "smooth": a.input.smooth, "level": a.level, "n": sample.len(), "dim": sample.dim() });
    let body = json!({
        "statistic": res.statistic,
        "p_value": res.p_value,
        "reject": res.reject,
        "level": res.level,
        "direction": res.direction,
    });
    emit_json(a.out.as_deref(), body, &m)
}

fn detect_cmd(a: DetectArgs, args: &[String]) -> Result<(), CliError> {
    let sample = load(&a.input)?;
    let n = sample.len();
    let trr = trr_params(&a.trr, n)?;
    let alpha_n = a.alpha_n.unwrap_or_else(|| default_window(n));
    let mut params = MpulseParams::new(
        alpha_n,
        a.c_tilde.unwrap_or_else(|| default_c_tilde(n, alpha_n)),
        a.tau2.unwrap_or(MpulseParams::DEFAULT_TAU2),
    )?;
    params = params.with_zero_dimension(match a.zero_dimension {
        ZeroDim::LeadingDirection => ZeroDimension::LeadingDirection,
        ZeroDim::NoChange => ZeroDimension::NoChange,
    });
    let res = detect(&sample, trr, &params)?;

    let mut m = base_manifest("detect", args, Some(&a.input));
    m.outputs.extend(a.out.clone());
    m.outputs.extend(a.emit_s.clone());
    m.params = json!({
        "smooth": a.input.smooth,
        "tau1": trr.tau1(),
        "c_n": trr.ridge(),
        "mpulse": params,
        "n": n,
        "dim": sample.dim(),
    });

    if let Some(path) = &a.emit_s {
        let mut w = io::create(path)?;
        let err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        writeln!(w, "i,S").map_err(err)?;
        for (i, s) in res.s_series.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, io::fmt_f64(*s)).map_err(err)?;
        }
        w.flush().map_err(err)?;
        write_sidecar(path, &m)?;
    }
    let body = json!({
        "q_hat": res.q_hat,
        "q_used": res.q_used,
        "locations": res.locations,
        "intervals": res.intervals,
        "k_hat": res.k_hat,
    });
    emit_json(a.out.as_deref(), body, &m)
}

fn reduce(a: ReduceArgs, args: &[String]) -> Result<(), CliError> {
    let sample = load(&a.input)?;
    let trr = trr_params(&a.trr, sample.len())?;
    let model = fit_ads(&sample, trr)?;

    let mut m = base_manifest("reduce", args, Some(&a.input));
    m.params = json!({ "smooth": a.input.smooth, "tau1": trr.tau1(), "c_n": trr.ridge(), "n": sample.len(), "dim": sample.dim() });
    if model.has_signal() {
        m.outputs.push(a.out.clone());
    }
    m.outputs.extend(a.model.clone());
    m.outputs.extend(a.scree.clone());

    if let Some(path) = &a.model {
        emit_json(Some(path), json!(model.to_export()), &m)?;
    }
    if let Some(path) = &a.scree {
        let eig: Vec<f64> = model.eigenvalues().iter().map(|v| v.max(0.0)).collect();
        let mut w = io::create(path)?;
        let err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        writeln!(w, "k,eigenvalue,ratio").map_err(err)?;
        for (k, v) in model.eigenvalues().iter().enumerate() {
            let ratio = eig
                .get(k + 1)
                .map(|next| io::fmt_f64((next + trr.ridge()) / (eig[k] + trr.ridge())))
                .unwrap_or_default();
            writeln!(w, "{},{},{ratio}", k + 1, io::fmt_f64(*v)).map_err(err)?;
        }
        w.flush().map_err(err)?;
        write_sidecar(path, &m)?;
    }
    if !model.has_signal() {
        return Err(CliError::NoSignal);
    }
    let header: Vec<String> = (1..=model.q_hat()).map(|j| format!("f{j}")).collect();
    io::write_matrix_csv(&a.out, &header, model.reduced())?;
    write_sidecar(&a.out, &m)
}

fn report_csv(rows: &[ReportRow]) -> String {
    let opt = |x: Option<f64>| x.map(io::fmt_f64).unwrap_or_default();
    let mut s = String::from("table,noise,method,n,K,D_c,u,reps,rate,k_mean,k_rmse,rand_index\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.table,
            r.noise,
            r.method,
            r.n,
            r.k,
            r.support,
            r.u,
            r.reps,
            opt(r.rate),
            opt(r.k_mean),
            opt(r.k_rmse),
            opt(r.rand_index)
        ));
    }
    s
}

fn bench(a: BenchArgs, args: &[String]) -> Result<(), CliError> {
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let rows = run_scenario_grid(&simulation_table(a.table, a.seed)?, a.reps)?;
    let text = report_csv(&rows);
    match &a.out {
        Some(path) => {
            let mut m = RunManifest::new("bench", args);
            m.outputs.push(path.clone());
            m.params = json!({ "table": a.table, "reps": a.reps });
            m.seed = Some(a.seed);
            io::write_text(path, &text)?;
            write_sidecar(path, &m)
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}
