//! Batch frontend for the `tqe` binary.
//!
//! Every command writes CSV or JSON to `--out` (stdout by default). Sweeps
//! and oracle runs are parallel over samples; each sample draws from its own
//! seeded stream, so output is identical for any worker count. The worker
//! count comes from `TQE_THREADS` when set.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;
use log::info;
use serde_json::json;

pub use args::{Cli, Command, Common, InequalityArg};
pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_VIOLATION};
use commands::{OracleConfig, SweepConfig, SweepKind};
use output::{emit, pretty, Format};

pub const THREADS_ENV: &str = "TQE_THREADS";

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_count() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer (got {v:?})"))),
        Err(_) => Ok(None),
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

/// Explicit `--q` list, else `--q-min/--q-max/--q-steps`, else `default`.
fn q_values(c: &Common, default: impl FnOnce() -> Vec<f64>) -> CliResult<Vec<f64>> {
    if let Some(q) = &c.q {
        return Ok(q.clone());
    }
    match (c.q_min, c.q_max) {
        (None, None) if c.q_steps.is_none() => Ok(default()),
        (Some(lo), Some(hi)) => {
            let steps = c.q_steps.unwrap_or(commands::DEFAULT_SWEEP_Q_STEPS);
            if !lo.is_finite() || !hi.is_finite() || lo > hi || steps == 0 {
                return Err(CliError::Usage(format!("bad q range [{lo}, {hi}] with {steps} steps")));
            }
            Ok(tqe_core::numerics::linspace(lo, hi, steps))
        }
        _ => Err(CliError::Usage("--q-min and --q-max must be given together".into())),
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let c = &cli.common;
    let out = c.out.as_deref();
    match &cli.command {
        Command::Critical => {
            let report = commands::critical()?;
            let text = match c.format.unwrap_or(Format::Json) {
                Format::Json => pretty(&serde_json::to_value(&report).expect("report serializes")),
                Format::Csv => report.table().to_csv(),
            };
            emit(out, &text)
        }
        Command::Curves { condition } => {
            let cond = commands::parse_condition(condition)?;
            let lo = c.q_min.unwrap_or(commands::CURVE_MARGIN);
            let hi = c.q_max.unwrap_or(1.0 - commands::CURVE_MARGIN);
            let steps = c.q_steps.unwrap_or(commands::DEFAULT_CURVE_STEPS);
            let (table, trace) = commands::curves(cond, lo, hi, steps)?;
            info!(
                "{}: {} points, {} gridpoints without a sign change",
                cond.name(),
                trace.curve.points.len(),
                trace.unbracketed.len()
            );
            emit(out, &table.render(c.format.unwrap_or(Format::Csv)))
        }
        Command::Surface { x_steps } => {
            let table = commands::surface(*x_steps, c.q_steps.unwrap_or(100))?;
            emit(out, &table.render(c.format.unwrap_or(Format::Csv)))
        }
        Command::Indicator { p_steps } => {
            let qs = q_values(c, || commands::DEFAULT_INDICATOR_Q.to_vec())?;
            let table = commands::indicator(&qs, *p_steps)?;
            emit(out, &table.render(c.format.unwrap_or(Format::Csv)))
        }
        Command::Sweep {
            inequality,
            inject_w,
            summary,
            dump_dir,
        } => {
            let kind = match inequality {
                InequalityArg::Ckw => SweepKind::Ckw,
                InequalityArg::Stqe => SweepKind::Stqe,
                InequalityArg::Mu => SweepKind::Mu,
            };
            let cfg = SweepConfig {
                inequality: kind,
                n_qubits: c.qubits.unwrap_or(3),
                samples: c.samples.unwrap_or(1000),
                q_values: q_values(c, || commands::analytic_q_grid(commands::DEFAULT_SWEEP_Q_STEPS))?,
                mu_values: c.mu.clone().unwrap_or_else(|| commands::DEFAULT_MU.to_vec()),
                focus: c.focus,
                seed: c.seed,
                tol: c.tol,
                inject_w: *inject_w,
            };
            let result = commands::sweep(&cfg)?;
            emit(out, &result.table().render(c.format.unwrap_or(Format::Csv)))?;
            let dumped = commands::dump_violators(dump_dir, &result.violators)?;
            let mut summary_json = serde_json::to_value(&result.summary).expect("summary serializes");
            summary_json["dumped"] = json!(dumped);
            write_summary(summary.as_deref(), &summary_json)?;
            if result.summary.violation_count > 0 {
                return Err(CliError::Violation {
                    count: result.summary.violation_count,
                    dumped,
                });
            }
            Ok(())
        }
        Command::Oracle {
            iters,
            ensemble,
            summary,
        } => {
            let cfg = OracleConfig {
                samples: c.samples.unwrap_or(20),
                q_values: q_values(c, || commands::DEFAULT_ORACLE_Q.to_vec())?,
                rank: c.rank,
                restarts: c.restarts,
                iters: *iters,
                ensemble: *ensemble,
                seed: c.seed,
            };
            let (rows, stats) = commands::oracle(&cfg)?;
            emit(out, &commands::oracle_table(&rows).render(c.format.unwrap_or(Format::Csv)))?;
            write_summary(
                summary.as_deref(),
                &serde_json::to_value(&stats).expect("summary serializes"),
            )?;
            if stats.min_gap < -commands::UPPER_BOUND_SLACK {
                return Err(CliError::Violation {
                    count: rows.iter().filter(|r| r.gap < -commands::UPPER_BOUND_SLACK).count(),
                    dumped: vec![],
                });
            }
            if stats.nonconverged as f64 > commands::ORACLE_FAILURE_FRACTION * stats.rows as f64 {
                return Err(CliError::Numerical(format!(
                    "convex-roof search unstable on {} of {} runs",
                    stats.nonconverged, stats.rows
                )));
            }
            Ok(())
        }
        Command::State { path } => {
            if c.format == Some(Format::Csv) {
                return Err(CliError::Usage("state reports are JSON only".into()));
            }
            let state = commands::load_state(path)?;
            let qs = q_values(c, || commands::DEFAULT_STATE_Q.to_vec())?;
            let (report, violations) = commands::state_report(&state, &qs, c.focus, c.tol, c.restarts, c.seed)?;
            emit(out, &pretty(&report))?;
            if violations > 0 {
                return Err(CliError::Violation {
                    count: violations,
                    dumped: vec![],
                });
            }
            Ok(())
        }
    }
}

fn write_summary(path: Option<&std::path::Path>, value: &serde_json::Value) -> CliResult<()> {
    match path {
        Some(p) => emit(Some(p), &pretty(value)),
        None => {
            eprint!("{}", pretty(value));
            Ok(())
        }
    }
}
