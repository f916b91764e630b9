//! Command-line front end: parse an experiment config, run a computation,
//! emit a machine-readable JSON report.
//!
//! Exit codes: 0 success, 1 failed verification table, 2 config/parse
//! problems, 3 enumeration budget exceeded, 4 numerical diagnostics.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mu_entropy::config::ExperimentConfig;
use mu_entropy::entropy::{
    entropy_rate, exact_entropy_sb, h1_partition_entropy, is_zero_entropy, partition_entropy,
    sb_truncation, truncation_entropy_series, EntropyReport, DEFAULT_DIVERGENCE_EPS,
    DEFAULT_DP_BUDGET, DEFAULT_H1_BUDGET,
};
use mu_entropy::error::Error;
use mu_entropy::mu_norm::{mu_norm_sq, partition_functional};
use mu_entropy::operators::truncate;
use mu_entropy::stochastic::{ergodic_projector, l1_opnorm};
use mu_entropy::verify;

#[derive(Parser)]
#[command(name = "muent", version, about = "Operator entropy on weighted sequence spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON document).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Enumeration budget override.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Numerical tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Worker thread cap (reserved; computations are currently sequential).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Logarithm base for reported entropies.
    #[arg(long, value_enum, global = true, default_value_t = LogBase::E)]
    log_base: LogBase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum LogBase {
    E,
    #[value(name = "2")]
    Two,
}

impl LogBase {
    fn scale(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => 1.0 / std::f64::consts::LN_2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// μ-norm ‖U_J‖²_μ and the partition functional M_χ.
    Munorm,
    /// The semibistochastic matrix b(U_J) with its row/column sums.
    Bmap,
    /// Cesàro projector, u-limits, and the closed-form weight vectors.
    Ergodic,
    /// Entropy computations.
    Entropy {
        #[command(subcommand)]
        which: EntropyCommand,
    },
    /// Run the built-in verification table; exits 0 iff every check passes.
    ReproducePaper,
}

#[derive(Subcommand)]
enum EntropyCommand {
    /// Exact finite-dimensional entropy 𝔥(U_J) via the closed form.
    Exact,
    /// Partition entropy 𝔥(U,χ,n) by dynamic programming.
    Partition,
    /// The variant 𝔥₁(U,χ,n) (matrix product per path).
    H1,
    /// Truncation series 𝔥(U_J), J = 1..=Jmax, with divergence flag.
    Truncate,
    /// Rate estimate lim (1/n)𝔥(U,χ,n).
    Rate,
    /// Zero-entropy classification of b(U_J), with witness entry.
    Classify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("muent: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        Error::Numerical(_) | Error::NotSemibistochastic(_) => 4,
        _ => 2,
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(b) = cli.budget {
        cfg.params.budget = Some(b);
    }
    if let Some(t) = cli.tol {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::Config(format!("tolerance must be positive, got {t}")));
        }
        cfg.params.tol = Some(t);
    }
    Ok(cfg)
}

fn emit(cli: &Cli, command: &str, elapsed: f64, result: Value) -> Result<(), Error> {
    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "log_base": cli.log_base,
        "threads": cli.threads,
        "wall_clock_seconds": elapsed,
        "result": result,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Config(format!("stdout: {e}")))
        }
    }
}

fn entropy_report_json(r: &EntropyReport, scale: f64) -> Value {
    json!({
        "value": r.value * scale,
        "method": r.method,
        "trace": r.trace.iter().map(|&(n, h)| json!([n, h * scale])).collect::<Vec<_>>(),
        "diagnostics": r.diagnostics,
    })
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let started = Instant::now();
    let scale = cli.log_base.scale();
    match &cli.command {
        Command::Munorm => {
            let cfg = load_config(cli)?;
            let spec = cfg.build_spec()?;
            let j = cfg.dimension()?;
            let u = truncate(&spec, j)?;
            let chi = cfg.build_partition()?;
            let norm = mu_norm_sq(&u);
            let functional = partition_functional(&u, &chi)?;
            emit(
                cli,
                "munorm",
                started.elapsed().as_secs_f64(),
                json!({
                    "j": j,
                    "mu_norm_sq": norm,
                    "partition_functional": functional,
                    "partition": chi.blocks(),
                }),
            )?;
        }
        Command::Bmap => {
            let cfg = load_config(cli)?;
            let spec = cfg.build_spec()?;
            let j = cfg.dimension()?;
            let b = sb_truncation(&spec, j)?;
            let rows: Vec<Vec<f64>> = (0..j)
                .map(|r| (0..j).map(|c| b.entry(r, c)).collect())
                .collect();
            let row_sums: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
            let col_sums: Vec<f64> = (0..j)
                .map(|c| (0..j).map(|r| rows[r][c]).sum())
                .collect();
            emit(
                cli,
                "bmap",
                started.elapsed().as_secs_f64(),
                json!({
                    "j": j,
                    "b": rows,
                    "row_sums": row_sums,
                    "col_sums": col_sums,
                    "l1_opnorm": l1_opnorm(b.data()),
                }),
            )?;
        }
        Command::Ergodic => {
            let cfg = load_config(cli)?;
            let spec = cfg.build_spec()?;
            let j = cfg.dimension()?;
            let tol = cfg.params.tol.unwrap_or(1e-10);
            let b = sb_truncation(&spec, j)?;
            let mu = spec.measure().prefix(j)?;
            let data = ergodic_projector(&b, &mu, tol)?;
            let p: Vec<Vec<f64>> = (0..j)
                .map(|r| (0..j).map(|c| data.projector[(r, c)]).collect())
                .collect();
            emit(
                cli,
                "ergodic",
                started.elapsed().as_secs_f64(),
                json!({
                    "j": j,
                    "tol": tol,
                    "projector": p,
                    "u": data.u,
                    "v": data.v,
                    "ut": data.ut,
                }),
            )?;
        }
        Command::Entropy { which } => {
            let cfg = load_config(cli)?;
            let spec = cfg.build_spec()?;
            let j = cfg.dimension()?;
            let (name, result) = match which {
                EntropyCommand::Exact => {
                    let b = sb_truncation(&spec, j)?;
                    let r = exact_entropy_sb(&b, &spec.measure().prefix(j)?)?;
                    ("entropy exact", entropy_report_json(&r, scale))
                }
                EntropyCommand::Partition => {
                    let n = cfg
                        .params
                        .n
                        .ok_or_else(|| Error::Config("params.n is required".into()))?;
                    let budget = cfg.params.budget.unwrap_or(DEFAULT_DP_BUDGET);
                    let u = truncate(&spec, j)?;
                    let chi = cfg.build_partition()?;
                    let h = partition_entropy(&u, &chi, n, budget)? * scale;
                    ("entropy partition", json!({ "n": n, "budget": budget, "value": h }))
                }
                EntropyCommand::H1 => {
                    let n = cfg
                        .params
                        .n
                        .ok_or_else(|| Error::Config("params.n is required".into()))?;
                    let budget = cfg.params.budget.unwrap_or(DEFAULT_H1_BUDGET);
                    let u = truncate(&spec, j)?;
                    let chi = cfg.build_partition()?;
                    let h = h1_partition_entropy(&u, &chi, n, budget)? * scale;
                    ("entropy h1", json!({ "n": n, "budget": budget, "value": h }))
                }
                EntropyCommand::Truncate => {
                    let jmax = cfg.params.jmax.unwrap_or(j);
                    let eps = cfg.params.divergence_eps.unwrap_or(DEFAULT_DIVERGENCE_EPS);
                    let r = truncation_entropy_series(&spec, jmax, eps)?;
                    ("entropy truncate", entropy_report_json(&r, scale))
                }
                EntropyCommand::Rate => {
                    let nmax = cfg
                        .params
                        .nmax
                        .ok_or_else(|| Error::Config("params.nmax is required".into()))?;
                    let budget = cfg.params.budget.unwrap_or(DEFAULT_DP_BUDGET);
                    let u = truncate(&spec, j)?;
                    let chi = cfg.build_partition()?;
                    let r = entropy_rate(&u, &chi, nmax, budget)?;
                    ("entropy rate", entropy_report_json(&r, scale))
                }
                EntropyCommand::Classify => {
                    let b = sb_truncation(&spec, j)?;
                    let (zero, witness) = is_zero_entropy(&b)?;
                    (
                        "entropy classify",
                        json!({ "zero_entropy": zero, "witness": witness }),
                    )
                }
            };
            emit(cli, name, started.elapsed().as_secs_f64(), result)?;
        }
        Command::ReproducePaper => {
            let results = verify::run_all();
            for r in &results {
                eprintln!(
                    "criterion {:2} [{}] {} — {}",
                    r.id,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            let all_passed = results.iter().all(|r| r.passed);
            emit(
                cli,
                "reproduce-paper",
                started.elapsed().as_secs_f64(),
                json!({
                    "all_passed": all_passed,
                    "criteria": results,
                }),
            )?;
            if !all_passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
