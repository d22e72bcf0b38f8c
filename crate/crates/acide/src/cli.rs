//! Command line front end.
//!
//! Exit codes: 0 success, 1 usage/IO/parse errors, 2 a violated cluster
//! assumption or infeasible cluster, 3 a budget below the livestream
//! bandwidth, 4 a simulated trace that misses the delay bound. Errors go to
//! stderr as `error[<reason>]: <message>`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use acide_core::{
    join_cluster, min_bandwidth, playback_check, simulate, validate_cluster, AdmissionBudget,
    Error as ModelError, PeerProfile, PlaybackReport, StreamParams, Violation,
};
use clap::{Parser, Subcommand, ValueEnum};

use crate::experiments::{
    admitted_vs_budget_curve, baseline_bandwidths, block_size_profile, run_admission_sweep,
    ExperimentError, ScenarioSpec, DEFAULT_DELAY_S, DEFAULT_SEED, SEED_ENV,
};
use crate::formats::{self, FormatError, SimulationInput};

#[derive(Debug, Parser)]
#[command(
    name = "acide",
    version,
    about = "Bandwidth allocation and admission control for P2P livestream clusters"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum-bandwidth allocation for a peer list.
    Solve(Args),
    /// Greedy admission of candidates under a budget.
    Admit(Args),
    /// Replay the two-phase distribution and check playback.
    Simulate(Args),
    /// Admission sweep over cluster sizes, livestream rates and budgets.
    Sweep(Args),
    /// Admitted peers as the budget grows from S/T to the full-pool cost.
    Curve(Args),
    /// Per-peer block sizes and bandwidths for generated clusters.
    Profile(Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Default, clap::Args)]
pub struct Args {
    /// Peer list (CSV or JSON), plan JSON, or scenario JSON depending on the command.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file, or directory when a command produces several tables.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Random seed; falls back to the scenario file, then $ACIDE_SEED, then 20231213.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output format; the default depends on the command.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Base station budget(s) BW in bits/s, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub budget_bps: Vec<f64>,
    /// Livestream rate(s) S/T in bits/s, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub livestream_bps: Vec<f64>,
    /// Playback delay bound T in milliseconds (default 200).
    #[arg(long)]
    pub delay_ms: Option<f64>,
    /// Package size S in bits; defaults to livestream rate times delay.
    #[arg(long)]
    pub package_bits: Option<f64>,
    /// Candidate cluster sizes N, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Use the built-in reference scenario instead of --input.
    #[arg(long)]
    pub table1_defaults: bool,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Format(FormatError),
    Validation(Vec<Violation>),
    Model(ModelError),
    Experiment(ExperimentError),
    Playback {
        peer: String,
        overshoot: f64,
    },
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Model(ModelError::Infeasible { .. }) => 2,
            CliError::Model(ModelError::InsufficientBudget { .. })
            | CliError::Experiment(ExperimentError::Model(ModelError::InsufficientBudget {
                ..
            })) => 3,
            CliError::Playback { .. } => 4,
            _ => 1,
        }
    }

    pub fn reason(&self) -> String {
        match self {
            CliError::Usage(_) => "usage".into(),
            CliError::Format(FormatError::Io { .. }) | CliError::Output { .. } => "io".into(),
            CliError::Format(FormatError::Parse { .. }) => "parse".into(),
            CliError::Validation(v) => {
                let mut codes: Vec<_> = v.iter().map(Violation::code).collect();
                codes.dedup();
                codes.join(",")
            }
            CliError::Model(e) | CliError::Experiment(ExperimentError::Model(e)) => match e {
                ModelError::Infeasible { .. } => "infeasible".into(),
                ModelError::InsufficientBudget { .. } => "insufficient-budget".into(),
                _ => "model".into(),
            },
            CliError::Experiment(_) => "experiment".into(),
            CliError::Playback { .. } => "playback".into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Format(e) => write!(f, "{e}"),
            CliError::Validation(v) => {
                let msgs: Vec<_> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&msgs.join("; "))
            }
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Experiment(e) => write!(f, "{e}"),
            CliError::Playback { peer, overshoot } => {
                write!(
                    f,
                    "peer {peer} completes {overshoot:.9} s after the delay bound"
                )
            }
            CliError::Output { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Format(e)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Model(m) => CliError::Model(m),
            other => CliError::Experiment(other),
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn single<T: Copy>(values: &[T], flag: &str) -> Result<Option<T>> {
    match values {
        [] => Ok(None),
        [x] => Ok(Some(*x)),
        _ => Err(usage(format!(
            "--{flag} takes a single value for this command"
        ))),
    }
}

fn require_input(args: &Args) -> Result<&Path> {
    args.input
        .as_deref()
        .ok_or_else(|| usage("--input is required"))
}

/// Flags override file values; the delay defaults to 200 ms.
fn resolve_stream(args: &Args, from_file: Option<StreamParams>) -> Result<StreamParams> {
    let delay = match args.delay_ms {
        Some(ms) => ms / 1000.0,
        None => from_file.map_or(DEFAULT_DELAY_S, |s| s.delay_bound),
    };
    let package = match (
        args.package_bits,
        single(&args.livestream_bps, "livestream-bps")?,
    ) {
        (Some(bits), _) => bits,
        (None, Some(v)) => v * delay,
        (None, None) => from_file.map(|s| s.package_size).ok_or_else(|| {
            usage("stream parameters missing: pass --package-bits or --livestream-bps")
        })?,
    };
    Ok(StreamParams::new(package, delay)?)
}

fn resolve_seed(args: &Args, from_file: Option<u64>) -> Result<u64> {
    if let Some(seed) = args.seed.or(from_file) {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV} is not an unsigned integer: {s:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn load_scenario(args: &Args) -> Result<ScenarioSpec> {
    let (mut spec, file_seed) = match (&args.input, args.table1_defaults) {
        (Some(_), true) => {
            return Err(usage(
                "--input and --table1-defaults are mutually exclusive",
            ))
        }
        (Some(path), false) => {
            let (spec, has_seed) = formats::read_scenario(path)?;
            let seed = has_seed.then_some(spec.seed);
            (spec, seed)
        }
        (None, _) => (ScenarioSpec::default(), None),
    };
    spec.seed = resolve_seed(args, file_seed)?;
    if !args.sizes.is_empty() {
        spec.cluster_sizes = args.sizes.clone();
    }
    if !args.livestream_bps.is_empty() {
        spec.livestream_bps = args.livestream_bps.clone();
    }
    if !args.budget_bps.is_empty() {
        spec.budgets_bps = args.budget_bps.clone();
    }
    if let Some(ms) = args.delay_ms {
        spec.delay_s = ms / 1000.0;
    }
    spec.validate()?;
    Ok(spec)
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    formats::write_file(path, contents).map_err(CliError::from)
}

/// Writes to `--output`, or to stdout without one.
fn emit(args: &Args, contents: &str) -> Result<()> {
    match &args.output {
        Some(path) => write_output(path, contents),
        None => std::io::stdout()
            .lock()
            .write_all(contents.as_bytes())
            .map_err(|source| CliError::Output {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

/// Whether `solve`/`admit`/`simulate` should write their full result to stdout.
fn body_on_stdout(args: &Args) -> bool {
    args.output.is_none() && args.format.is_some()
}

/// One-line result summary; moves to stderr when stdout carries the body.
fn summary(args: &Args, line: fmt::Arguments<'_>) {
    if body_on_stdout(args) {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

/// Writes the full result when `--output` or `--format` asks for it.
fn emit_body(args: &Args, default: Format, render: impl FnOnce(Format) -> String) -> Result<()> {
    if args.output.is_none() && args.format.is_none() {
        return Ok(());
    }
    emit(args, &render(args.format.unwrap_or(default)))
}

/// Writes one table per entry: to a single file/stdout, or into `--output` as a directory.
fn emit_many(args: &Args, tables: Vec<(String, String)>) -> Result<()> {
    if let [(_, contents)] = tables.as_slice() {
        return emit(args, contents);
    }
    let dir = args
        .output
        .as_deref()
        .ok_or_else(|| usage("several tables requested: pass --output <directory>"))?;
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    for (name, contents) in tables {
        write_output(&dir.join(name), &contents)?;
    }
    Ok(())
}

fn check_cluster(peers: &[PeerProfile], stream: &StreamParams) -> Result<()> {
    let report = validate_cluster(peers, stream);
    if report.is_ok() {
        Ok(())
    } else {
        Err(CliError::Validation(report.violations))
    }
}

fn solve(args: &Args) -> Result<()> {
    let input = formats::read_cluster(require_input(args)?)?;
    let stream = resolve_stream(args, input.stream)?;
    check_cluster(&input.peers, &stream)?;
    let plan = min_bandwidth(&input.peers, &stream)?;

    let base = baseline_bandwidths(plan.len(), &stream);
    summary(
        args,
        format_args!(
            "n={} bw_bps={:.2} T1_s={:.9} T2_s={:.9} unicast_bps={:.2} multicast_bps={:.2}",
            plan.len(),
            plan.total_bandwidth,
            plan.phase1_time,
            plan.phase2_time,
            base.unicast,
            base.multicast
        ),
    );
    emit_body(args, Format::Json, |format| match format {
        Format::Json => formats::to_json(&plan),
        Format::Csv => formats::plan_csv(&plan),
    })
}

fn admit(args: &Args) -> Result<()> {
    let input = formats::read_cluster(require_input(args)?)?;
    let stream = resolve_stream(args, input.stream)?;
    if input.peers.is_empty() {
        return Err(CliError::Validation(vec![Violation::EmptyCluster]));
    }
    let broken: Vec<_> = input
        .peers
        .iter()
        .filter(|p| p.upload > p.download)
        .map(|p| Violation::UploadExceedsDownload {
            id: p.id.clone(),
            upload: p.upload,
            download: p.download,
        })
        .collect();
    if !broken.is_empty() {
        return Err(CliError::Validation(broken));
    }
    let budget = single(&args.budget_bps, "budget-bps")?
        .or(input.budget_bps)
        .ok_or_else(|| usage("budget missing: pass --budget-bps or set budget_bps in the input"))?;

    let outcome = join_cluster(&AdmissionBudget::new(budget, input.peers, stream)?)?;
    summary(
        args,
        format_args!(
            "n={} of N={} bw_bps={:.2} BW_bps={:.2} efficiency_pct={:.2}",
            outcome.admitted_count(),
            outcome.admitted_count() + outcome.rejected.len(),
            outcome.plan.total_bandwidth,
            budget,
            outcome.efficiency * 100.0
        ),
    );
    emit_body(args, Format::Json, |format| match format {
        Format::Json => formats::to_json(&outcome),
        Format::Csv => formats::plan_csv(&outcome.plan),
    })
}

fn simulate_cmd(args: &Args) -> Result<()> {
    let plan = match formats::read_simulation_input(require_input(args)?)? {
        SimulationInput::Plan(plan) => plan,
        SimulationInput::Cluster(input) => {
            let stream = resolve_stream(args, input.stream)?;
            check_cluster(&input.peers, &stream)?;
            min_bandwidth(&input.peers, &stream)?
        }
    };
    let trace = simulate(&plan)?;
    emit_body(args, Format::Csv, |format| match format {
        Format::Csv => formats::trace_csv(&trace),
        Format::Json => formats::to_json(&trace),
    })?;
    match playback_check(&trace, &plan.stream) {
        PlaybackReport::Continuous { slack } => {
            summary(
                args,
                format_args!(
                    "continuous makespan_s={:.9} delay_bound_s={:.9} slack_s={:.9} events={}",
                    trace.makespan,
                    plan.stream.delay_bound,
                    slack,
                    trace.events.len()
                ),
            );
            Ok(())
        }
        PlaybackReport::Violation {
            peer,
            completion,
            overshoot,
        } => {
            summary(
                args,
                format_args!(
                    "violation peer={peer} completion_s={completion:.9} overshoot_s={overshoot:.9}"
                ),
            );
            Err(CliError::Playback { peer, overshoot })
        }
    }
}

fn sweep(args: &Args) -> Result<()> {
    let spec = load_scenario(args)?;
    let records = run_admission_sweep(&spec)?;
    let body = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => formats::records_csv(&records),
        Format::Json => formats::to_json(&records),
    };
    emit(args, &body)
}

fn curve(args: &Args) -> Result<()> {
    let spec = load_scenario(args)?;
    let mut tables = Vec::new();
    for &n in &spec.cluster_sizes {
        for &v in &spec.livestream_bps {
            let points = admitted_vs_budget_curve(&spec, n, v)?;
            let (ext, body) = match args.format.unwrap_or(Format::Csv) {
                Format::Csv => ("csv", formats::curve_csv(&points)),
                Format::Json => ("json", formats::to_json(&points)),
            };
            tables.push((format!("curve_N{n}_v{v}.{ext}"), body));
        }
    }
    emit_many(args, tables)
}

fn profile(args: &Args) -> Result<()> {
    let spec = load_scenario(args)?;
    let v = match spec.livestream_bps.as_slice() {
        [v] => *v,
        // Without an explicit rate, profile at the lowest configured one.
        _ if args.livestream_bps.is_empty() => {
            spec.livestream_bps.iter().cloned().fold(f64::MAX, f64::min)
        }
        _ => return Err(usage("--livestream-bps takes a single value for profile")),
    };
    let profiles = block_size_profile(&spec, &spec.cluster_sizes, v)?;
    let tables = profiles
        .iter()
        .map(|p| match args.format.unwrap_or(Format::Csv) {
            Format::Csv => (format!("profile_n{}.csv", p.size), formats::profile_csv(p)),
            Format::Json => (format!("profile_n{}.json", p.size), formats::to_json(p)),
        })
        .collect();
    emit_many(args, tables)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Admit(a) => admit(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Curve(a) => curve(a),
        Command::Profile(a) => profile(a),
    }
}
