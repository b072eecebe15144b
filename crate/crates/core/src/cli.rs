//! Command-line front end.
//!
//! `generate`, `run`, `sweep`, `oracle` and `gates`. Any flag may also come
//! from a flat `key = value` file passed with `--config`; flags given on the
//! command line win.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ansatz::{gate_counts, AnsatzKind};
use crate::encoding::{delta_omega, BppInstance};
use crate::error::Error;
use crate::optimizer::OptConfig;
use crate::oracle::oracle;
use crate::pipeline::{run_experiment, ExperimentConfig, RunReport, RunStatus};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_LOAD: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;
pub const EXIT_CAP: u8 = 5;
pub const EXIT_OTHER: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "dcbpp", version, about = "Bin packing by variational subset sampling")]
pub struct Cli {
    /// Flat `key = value` file supplying default flags for the command.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random instance with uniform integer weights.
    Generate(GenerateArgs),
    /// Run the full pipeline on one instance and write a JSON report.
    Run(RunArgs),
    /// Run every cell of a parameter grid and write an aggregate CSV.
    Sweep(SweepArgs),
    /// Brute-force ground truth for an instance.
    Oracle(OracleArgs),
    /// Per-layer gate counts for every ansatz as CSV.
    Gates(GatesArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lo: u64,
    #[arg(long)]
    pub hi: u64,
    #[arg(long, default_value_t = 120)]
    pub capacity: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flags shared by `run` and `sweep`.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Instance file (JSON, or CSV with a `capacity,<C>` header).
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Selection threshold; defaults to 2^-n.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Shots per readout; 0 reads the exact distribution.
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    /// Iterations at which distributions are recorded, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<usize>,
    /// Weight the CD pool by the commutator coefficients.
    #[arg(long)]
    pub cd_weighted: bool,
    /// Penalty weight B.
    #[arg(long, default_value_t = 1.0)]
    pub penalty: f64,
    /// Embed the brute-force oracle in each report.
    #[arg(long)]
    pub with_oracle: bool,
    /// Record wall-clock time in reports (breaks byte-identical output).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "cdmixer")]
    pub ansatz: AnsatzKind,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 1.0)]
    pub stepsize: f64,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    /// Cost histories as CSV (`k,trial,iteration,cost`).
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_delimiter = ',', default_value = "cdmixer")]
    pub ansatz: Vec<AnsatzKind>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub layers: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub stepsize: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub iterations: Vec<usize>,
    /// Output directory for cell reports and `aggregate.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Also list the ground states of every sub-Hamiltonian at this stepsize.
    #[arg(long)]
    pub stepsize: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub penalty: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GatesArgs {
    /// Item counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub n: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn load(e: Error) -> Self {
        Self::new(EXIT_LOAD, e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::EmptySchedule { .. } | Error::Precondition(_) => EXIT_CONFIG,
            Error::InvalidInstance(_) | Error::Parse { .. } => EXIT_LOAD,
            Error::CoverInfeasible => EXIT_INFEASIBLE,
            Error::CapExceeded { .. } | Error::QubitsOutOfRange(..) => EXIT_CAP,
            _ => EXIT_OTHER,
        };
        Self::new(code, e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
    };
    let mut cmd = Cli::command();
    // Later flags replace earlier ones, which is what lets the command line
    // override values spliced in from the config file.
    for name in ["generate", "run", "sweep", "oracle", "gates"] {
        cmd = cmd.mut_subcommand(name, |c| c.args_override_self(true));
    }
    let cli = match cmd.try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Splices the flags from a `--config` file in right after the subcommand
/// name, so anything given explicitly later on the line overrides them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => {
                let p = it.next().ok_or_else(|| CliError::new(EXIT_CONFIG, "--config needs a file"))?;
                path = Some(PathBuf::from(p));
            }
            Some(s) if s.starts_with("--config=") => path = Some(PathBuf::from(&s["--config=".len()..])),
            _ => rest.push(a),
        }
    }
    let Some(path) = path else { return Ok(rest) };

    let cmd = Cli::command();
    let Some(pos) = rest.iter().skip(1).position(|a| a.to_str().is_some_and(|s| cmd.find_subcommand(s).is_some()))
    else {
        return Ok(rest);
    };
    let pos = pos + 1;
    let sub = cmd.find_subcommand(rest[pos].to_str().unwrap()).unwrap();
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::new(EXIT_LOAD, format!("failed to read {}: {e}", path.display())))?;
    let injected =
        config_flags(&text, sub).map_err(|m| CliError::new(EXIT_CONFIG, format!("{}: {m}", path.display())))?;
    rest.splice(pos + 1..pos + 1, injected);
    Ok(rest)
}

/// Turns `key = value` lines into flags accepted by `sub`.
fn config_flags(text: &str, sub: &clap::Command) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| format!("line {}: unknown key {key:?} for `{}`", lineno + 1, sub.get_name()))?;
        if arg.get_action().takes_values() {
            out.push(format!("--{key}").into());
            out.push(value.into());
        } else {
            match value {
                "true" | "1" | "yes" => out.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                other => return Err(format!("line {}: {key} expects true or false, got {other:?}", lineno + 1)),
            }
        }
    }
    Ok(out)
}

pub fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Generate(a) => cmd_generate(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Gates(a) => cmd_gates(&a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::new(EXIT_OTHER, format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::new(EXIT_OTHER, format!("failed to write {}: {e}", path.display())))
}

/// `n` weights uniform on `[lo, hi]`.
pub fn generate_instance(n: usize, lo: u64, hi: u64, capacity: u64, seed: u64) -> crate::error::Result<BppInstance> {
    if !(1 <= lo && lo <= hi && hi <= capacity) {
        return Err(Error::Config(format!("need 1 <= lo <= hi <= capacity, got lo={lo} hi={hi} capacity={capacity}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BppInstance::new((0..n).map(|_| rng.random_range(lo..=hi)).collect(), capacity)
}

fn cmd_generate(a: &GenerateArgs) -> Result<(), CliError> {
    let inst = generate_instance(a.n, a.lo, a.hi, a.capacity, a.seed)?;
    emit(a.out.as_deref(), &inst.to_json())
}

impl CommonArgs {
    fn experiment(&self, kind: AnsatzKind, layers: usize, stepsize: f64, iterations: usize) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            layers,
            stepsize,
            penalty_b: self.penalty,
            threshold: self.threshold,
            shots: self.shots,
            cd_weighted: self.cd_weighted,
            opt: OptConfig {
                iterations,
                learning_rate: self.lr,
                trials: self.trials,
                seed: self.seed,
                snapshots: self.snapshots.clone(),
                ..OptConfig::default()
            },
            with_oracle: self.with_oracle,
            record_wall_clock: self.timing,
        }
    }
}

fn history_csv(report: &RunReport) -> String {
    let mut s = String::from("k,trial,iteration,cost\n");
    for r in &report.histories {
        for (t, h) in r.histories.iter().enumerate() {
            for (i, c) in h.iter().enumerate() {
                let _ = writeln!(s, "{},{t},{i},{c}", r.k);
            }
        }
    }
    s
}

fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let inst = BppInstance::load(&a.common.instance).map_err(CliError::load)?;
    let cfg = a.common.experiment(a.ansatz, a.layers, a.stepsize, a.iterations);
    let report = run_experiment(&inst, &cfg)?;
    if let Some(h) = &a.history {
        write_file(h, &history_csv(&report))?;
    }
    emit(a.out.as_deref(), &report.to_json())?;
    if report.status == RunStatus::CoverInfeasible {
        return Err(CliError::new(EXIT_INFEASIBLE, "sampled blocks do not cover every item"));
    }
    Ok(())
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy)]
struct Cell {
    kind: AnsatzKind,
    layers: usize,
    stepsize: f64,
    iterations: usize,
}

impl Cell {
    fn file_name(&self) -> String {
        format!("{}_p{}_s{}_it{}.json", self.kind, self.layers, self.stepsize, self.iterations)
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), CliError> {
    if a.ansatz.is_empty() || a.layers.is_empty() || a.stepsize.is_empty() || a.iterations.is_empty() {
        return Err(CliError::new(EXIT_CONFIG, "every sweep axis needs at least one value"));
    }
    let inst = BppInstance::load(&a.common.instance).map_err(CliError::load)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::new(EXIT_OTHER, format!("{}: {e}", a.out.display())))?;

    let mut cells = Vec::new();
    for &kind in &a.ansatz {
        for &layers in &a.layers {
            for &stepsize in &a.stepsize {
                for &iterations in &a.iterations {
                    cells.push(Cell { kind, layers, stepsize, iterations });
                }
            }
        }
    }

    // Every cell uses the master seed, so a cell reproduces the equivalent `run`.
    let rows: Vec<String> = cells
        .par_iter()
        .map(|cell| {
            let cfg = a.common.experiment(cell.kind, cell.layers, cell.stepsize, cell.iterations);
            let head = format!("{},{},{},{}", cell.kind, cell.layers, cell.stepsize, cell.iterations);
            let outcome = run_experiment(&inst, &cfg).map_err(|e| e.to_string()).and_then(|report| {
                write_file(&a.out.join(cell.file_name()), &report.to_json()).map_err(|e| e.message)?;
                Ok(report)
            });
            match outcome {
                Ok(r) => {
                    let m = &r.metrics;
                    let opt = |v: Option<String>| v.unwrap_or_default();
                    let status = match r.status {
                        RunStatus::Ok => "ok",
                        RunStatus::CoverInfeasible => "cover_infeasible",
                    };
                    format!(
                        "{head},{},{},{},{},{},{},{},{status}",
                        m.fr,
                        m.fr_mean,
                        m.fr_std,
                        m.fps,
                        m.ips,
                        opt(m.m_opt.map(|x| x.to_string())),
                        opt(m.fs_unordered.map(|x| x.to_string())),
                    )
                }
                Err(msg) => {
                    eprintln!("cell {head}: {msg}");
                    format!("{head},,,,,,,,error: {}", msg.replace([',', '\n'], ";"))
                }
            }
        })
        .collect();

    let mut csv = String::from("kind,p,stepsize,iterations,fr,fr_mean,fr_std,fps,ips,m_opt,fs,status\n");
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    write_file(&a.out.join("aggregate.csv"), &csv)
}

fn cmd_oracle(a: &OracleArgs) -> Result<(), CliError> {
    let inst = BppInstance::load(&a.instance).map_err(CliError::load)?;
    let schedule = a.stepsize.map(|s| (a.penalty, delta_omega(&inst), s));
    let result = oracle(&inst, schedule)?;
    let mut json = serde_json::to_string_pretty(&result).expect("oracle result serializes");
    json.push('\n');
    emit(a.out.as_deref(), &json)
}

fn cmd_gates(a: &GatesArgs) -> Result<(), CliError> {
    let mut csv =
        String::from("kind,n,parameterized,cnot,total,reference_parameterized,reference_cnot,reference_total\n");
    for &n in &a.n {
        for kind in AnsatzKind::ALL {
            let g = gate_counts(kind, n)?;
            let _ = writeln!(
                csv,
                "{kind},{n},{},{},{},{},{},{}",
                g.parameterized, g.cnot, g.total, g.reference_parameterized, g.reference_cnot, g.reference_total
            );
        }
    }
    emit(a.out.as_deref(), &csv)
}
