//! Command-line driver behind the `fracwalk` binary: `solve`, `validate`,
//! `robin`, `bench` and `ml-eval`.
//!
//! Exit codes: 0 success, 2 invalid input (the offending row is named),
//! 3 numerical failure, 1 anything else (I/O).

pub mod bench;
pub mod report;
pub mod robin;
pub mod validate;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::estimator::{estimate, EstimateConfig, EstimateError, StatsError};
use crate::model::{Mode, ModelError, ProblemFile};
use crate::reference::{l1_solve, L1Config, ReferenceError};
use crate::special::{ml_eval, MlError, MlQuery};
use crate::walker::WalkConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(_) | CliError::Config(_) => 2,
            CliError::Estimate(EstimateError::Model(_) | EstimateError::TooFewWalks(_) | EstimateError::Level(_)) => 2,
            CliError::Estimate(EstimateError::Pool(_)) | CliError::Io { .. } => 1,
            CliError::Estimate(EstimateError::Walk { .. })
            | CliError::Reference(_)
            | CliError::Stats(_)
            | CliError::Ml(_)
            | CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "fracwalk", version, about = "Random-walk solutions and sensitivities of fractional linear ODE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Random walks per estimate.
    #[arg(long)]
    pub walks: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Significance level p of intervals and tests.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the solution and all sensitivities for a problem file.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// Overrides the mode in the problem file.
        #[arg(long)]
        mode: Option<Mode>,
        /// Also write the L1 reference trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// L1 steps for `--trajectory`.
        #[arg(long, default_value_t = 4096)]
        nt: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Random-system validation against the L1 and finite-difference oracles.
    Validate {
        #[arg(long, default_value_t = 100)]
        systems: usize,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 4096)]
        nt: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Loss sweeps for the Robin-boundary heat problem with bootstrap intervals.
    Robin {
        #[arg(long, default_value_t = 20)]
        nx: usize,
        /// Final time.
        #[arg(long, default_value_t = 0.01)]
        time: f64,
        #[arg(long, default_value_t = 5000)]
        bootstrap: usize,
        #[arg(long, default_value_t = 4096)]
        nt: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Jump-count scaling on Dirichlet Laplacians.
    Bench {
        /// Interior grid parameter for the time and dimension sweeps.
        #[arg(long, default_value_t = 8)]
        nx: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate E_{alpha,beta}(z) and its partial derivatives.
    MlEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// One or more arguments, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        z: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| io_err(Path::new("stdout"), e))
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn check_level(level: f64) -> Result<(), CliError> {
    if level > 0.0 && level < 0.5 {
        Ok(())
    } else {
        Err(CliError::Config(format!("significance level {level} outside (0, 0.5)")))
    }
}

fn check_walks(walks: u64) -> Result<u64, CliError> {
    if walks >= 2 {
        Ok(walks)
    } else {
        Err(CliError::Config(format!("need at least 2 walks, got {walks}")))
    }
}

pub fn cmd_solve(
    problem: &Path,
    mode: Option<Mode>,
    trajectory: Option<&Path>,
    nt: usize,
    common: &Common,
) -> Result<(), CliError> {
    check_level(common.level)?;
    let text = std::fs::read_to_string(problem).map_err(|e| io_err(problem, e))?;
    let file = ProblemFile::parse(&text)?;
    let p = file.to_problem()?;
    let mode = mode.unwrap_or(file.mode);
    let walks = check_walks(common.walks.or(file.num_walks).unwrap_or(100_000))?;
    let seed = common.seed.or(file.seed).unwrap_or(1);
    let mut cfg = EstimateConfig::new(walks, seed);
    cfg.workers = common.workers;
    cfg.level = common.level;
    cfg.walk = match mode {
        Mode::Simplified => WalkConfig::simplified(),
        Mode::General => WalkConfig::solution_only(Mode::General),
    };
    let r = estimate(&p, &cfg)?;
    let hash = report::problem_hash(&file.canonical()?);
    let text = match common.format {
        Format::Json => json(&report::ReportJson::new(&r, hash)),
        Format::Csv => report::to_csv(&r),
    };
    emit(common, &text)?;
    if let Some(path) = trajectory {
        let tr = l1_solve(&p, &L1Config::new(nt))?;
        let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
        tr.write_csv(std::io::BufWriter::new(f)).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

pub fn cmd_validate(systems: usize, n: usize, nt: usize, common: &Common) -> Result<(), CliError> {
    check_level(common.level)?;
    if n < 2 {
        return Err(CliError::Config(format!("random systems need n >= 2, got {n}")));
    }
    let cfg = validate::ValidateConfig {
        systems,
        n,
        walks: check_walks(common.walks.unwrap_or(100_000))?,
        seed: common.seed.unwrap_or(1),
        workers: common.workers,
        level: common.level,
        n_t: nt,
    };
    let report = validate::run_validation(&cfg, |k, res| match res {
        Ok(c) => eprintln!("system {k:>3}: {:?}", c.passes()),
        Err(e) => eprintln!("system {k:>3}: failed: {e}"),
    });
    eprintln!();
    eprintln!("{}", validate::TABLE_COLUMNS.join(" | "));
    eprintln!("{}", report.pass_counts.map(|c| format!("{c}/{systems}")).join(" | "));
    let text = match common.format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut s = String::from("system,solution,grad_A,grad_alpha,grad_u0,grad_T\n");
            for c in &report.checks {
                let p = c.passes().map(|b| (b as u8).to_string());
                s.push_str(&format!("{},{}\n", c.system, p.join(",")));
            }
            s.push_str(&format!("total,{}\n", report.pass_counts.map(|c| c.to_string()).join(",")));
            s
        }
    };
    emit(common, &text)
}

pub fn cmd_robin(nx: usize, time: f64, bootstrap: usize, nt: usize, common: &Common) -> Result<(), CliError> {
    check_level(common.level)?;
    let cfg = robin::RobinConfig {
        n_x: nx,
        t_final: time,
        walks: check_walks(common.walks.unwrap_or(1_000_000))?,
        bootstrap,
        seed: common.seed.unwrap_or(1),
        workers: common.workers,
        level: common.level,
        n_t: nt,
        ..robin::RobinConfig::default()
    };
    let report = robin::run_robin(&cfg, |msg| eprintln!("{msg}"))?;
    eprintln!("overlaps: {}/{}", report.overlaps, report.points.len());
    let text = match common.format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut s = String::from("quantity,theta,deterministic,stochastic,ci_lo,ci_hi,overlap\n");
            for p in &report.points {
                let q = serde_json::to_value(p.quantity).expect("serializes");
                s.push_str(&format!(
                    "{},{:e},{:e},{:e},{:e},{:e},{}\n",
                    q.as_str().unwrap_or_default(),
                    p.theta,
                    p.deterministic,
                    p.stochastic,
                    p.ci[0],
                    p.ci[1],
                    p.overlap
                ));
            }
            s
        }
    };
    emit(common, &text)
}

pub fn cmd_bench(nx: usize, common: &Common) -> Result<(), CliError> {
    check_level(common.level)?;
    let cfg = bench::BenchConfig {
        walks: check_walks(common.walks.unwrap_or(10_000))?,
        seed: common.seed.unwrap_or(1),
        workers: common.workers,
        n_x: nx,
        ..bench::BenchConfig::default()
    };
    let r = bench::run_bench(&cfg)?;
    for s in &r.time_sweeps {
        eprintln!("alpha={}: slope in T {:.3}", s.alpha, s.fit.slope);
    }
    eprintln!("slope in n_x {:.3}; linear in d with R^2 {:.4}", r.grid_fit.slope, r.dim_fit.r2);
    let text = match common.format {
        Format::Json => json(&r),
        Format::Csv => {
            let mut s = String::from("sweep,dim,n_x,alpha,T,mean_jumps,micros_per_walk\n");
            let rows = r
                .time_sweeps
                .iter()
                .flat_map(|t| t.points.iter().map(|p| ("time", p)))
                .chain(r.grid_sweep.iter().map(|p| ("grid", p)))
                .chain(r.dim_sweep.iter().map(|p| ("dim", p)));
            for (name, p) in rows {
                s.push_str(&format!(
                    "{name},{},{},{},{},{:e},{:.3}\n",
                    p.dim, p.n_x, p.alpha, p.t_final, p.mean_jumps, p.micros_per_walk
                ));
            }
            s
        }
    };
    emit(common, &text)
}

#[derive(Debug, Serialize)]
struct MlRow {
    alpha: f64,
    beta: f64,
    z: f64,
    value: f64,
    d_alpha: f64,
    d_beta: f64,
    d_z: f64,
}

pub fn cmd_ml_eval(alpha: f64, beta: f64, zs: &[f64], common: &Common) -> Result<(), CliError> {
    check_level(common.level)?;
    let rows = zs
        .iter()
        .map(|&z| {
            let v = ml_eval(MlQuery::new(alpha, beta, z), true)?;
            Ok(MlRow { alpha, beta, z, value: v.value, d_alpha: v.d_alpha, d_beta: v.d_beta, d_z: v.d_z })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let text = match common.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut s = String::from("alpha,beta,z,value,d_alpha,d_beta,d_z\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{:e},{:e},{:e},{:e}\n",
                    r.alpha, r.beta, r.z, r.value, r.d_alpha, r.d_beta, r.d_z
                ));
            }
            s
        }
    };
    emit(common, &text)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve { problem, mode, trajectory, nt, common } => {
            cmd_solve(problem, *mode, trajectory.as_deref(), *nt, common)
        }
        Command::Validate { systems, n, nt, common } => cmd_validate(*systems, *n, *nt, common),
        Command::Robin { nx, time, bootstrap, nt, common } => cmd_robin(*nx, *time, *bootstrap, *nt, common),
        Command::Bench { nx, common } => cmd_bench(*nx, common),
        Command::MlEval { alpha, beta, z, common } => cmd_ml_eval(*alpha, *beta, z, common),
    }
}

/// Parses `std::env::args`, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
