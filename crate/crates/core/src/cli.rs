//! Command-line front end: `solve`, `converge` and `verify`.
//!
//! Exit codes: 0 success, 1 a law property failed, 2 configuration or I/O error,
//! 3 the solver failed (nonlinear non-convergence or linear breakdown).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::analysis::{convergence_rates, error_at_final_time, ErrorRecord};
use crate::config::{OutputConfig, OutputFormat, RunConfiguration};
use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::law::properties::{run_property_suite, SuiteSize};
use crate::law::GeneralizedPolynomial;
use crate::mesh::Mesh;
use crate::solver::{run_simulation, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "forchheimer", version, about = "Galerkin solver for generalized Forchheimer flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Seed for the property-suite sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single run on one mesh; writes per-step monitors and final errors.
    Solve,
    /// Runs every mesh size and writes the error/rate table.
    Converge,
    /// Runs the law property suite on the `law` of --config (only `law` and
    /// `[output]` are read); without --config the law is g(s) = 1 + s.
    Verify,
}

/// Error with the exit code it maps to.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) => EXIT_CONFIG,
        Error::Step { source, .. } => exit_code(source),
        _ => EXIT_SOLVER,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfiguration> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    RunConfiguration::from_path(path)
}

fn format_of(cli: &Cli, output: &OutputConfig) -> OutputFormat {
    cli.format.or(output.format).unwrap_or_default()
}

fn emit(cli: &Cli, output: &OutputConfig, text: &str) -> Result<()> {
    match cli.output.as_ref().or(output.path.as_ref()) {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_one(config: &RunConfiguration, n: usize) -> Result<RunReport> {
    let case = config.case()?;
    let space = Arc::new(FeSpace::new(Mesh::unit_square(n)?, config.order)?);
    run_simulation(&space, &config.law, &case, &config.solver_config(n))
}

fn q_label(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

/// Per-step monitors followed by the final errors (when the case has an exact solution).
pub fn solve_report(config: &RunConfiguration, format: OutputFormat) -> Result<String> {
    if config.mesh_sizes.len() != 1 {
        return Err(Error::Config(format!(
            "mesh_sizes: solve needs exactly one N (got {})",
            config.mesh_sizes.len()
        )));
    }
    let n = config.mesh_sizes[0];
    let report = run_one(config, n)?;
    let case = config.case()?;
    let errors = match case.exact {
        Some(_) => Some(error_at_final_time(&report, &case)?),
        None => None,
    };

    let mut header: Vec<String> = ["step", "time", "iterations", "last_update", "residual", "mass_defect", "l2_norm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(config.q_list.iter().map(|&q| format!("l{}_norm", q_label(q))));
    header.push("grad_lbeta_norm".into());

    let mut rows = vec![{
        let mut r = vec!["0".into(), "0".into(), "0".into(), String::new(), String::new(), String::new()];
        r.push(format!("{:.10e}", report.initial.l2));
        r.extend(report.initial.lq.iter().map(|(_, v)| format!("{v:.10e}")));
        r.push(format!("{:.10e}", report.initial.grad_lbeta));
        r
    }];
    for s in &report.steps {
        let mut r = vec![
            s.step.to_string(),
            format!("{}", s.time),
            s.stats.iterations.to_string(),
            format!("{:.3e}", s.stats.last_update),
            format!("{:.3e}", s.stats.residual),
            format!("{:.3e}", s.stats.mass_defect),
            format!("{:.10e}", s.monitors.l2),
        ];
        r.extend(s.monitors.lq.iter().map(|(_, v)| format!("{v:.10e}")));
        r.push(format!("{:.10e}", s.monitors.grad_lbeta));
        rows.push(r);
    }

    let mut error_header: Vec<String> = ["N", "h", "dt", "l2_error", "grad_lbeta_error", "linf_error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut error_row = Vec::new();
    if let Some(e) = &errors {
        error_header.extend(e.lq_errors.iter().map(|(q, _)| format!("l{}_error", q_label(*q))));
        error_row = vec![
            e.n.to_string(),
            format!("{:.6e}", e.h),
            format!("{:.6e}", e.dt),
            format!("{:.6e}", e.l2_error),
            format!("{:.6e}", e.grad_lbeta_error),
            e.linf_error.map(|v| format!("{v:.6e}")).unwrap_or_default(),
        ];
        error_row.extend(e.lq_errors.iter().map(|(_, v)| format!("{v:.6e}")));
    }

    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            let _ = writeln!(out, "{}", header.join(","));
            for r in &rows {
                let _ = writeln!(out, "{}", r.join(","));
            }
            if errors.is_some() {
                let _ = writeln!(out, "\n{}", error_header.join(","));
                let _ = writeln!(out, "{}", error_row.join(","));
            }
        }
        OutputFormat::Markdown => {
            let table = |out: &mut String, head: &[String], rows: &[Vec<String>]| {
                let _ = writeln!(out, "| {} |", head.join(" | "));
                let _ = writeln!(out, "|{}", "---:|".repeat(head.len()));
                for r in rows {
                    let _ = writeln!(out, "| {} |", r.join(" | "));
                }
            };
            let _ = writeln!(out, "## {} (N = {n}, r = {}, dt = {})\n", config.case_name, config.order, report.dt);
            table(&mut out, &header, &rows);
            if errors.is_some() {
                let _ = writeln!(out, "\n## Errors at T = {}\n", report.t_final);
                table(&mut out, &error_header, &[error_row]);
            }
        }
    }
    Ok(out)
}

/// Final-time errors for every mesh size, in ascending `N`.
pub fn convergence_records(config: &RunConfiguration) -> Result<Vec<ErrorRecord>> {
    config.require_doubling()?;
    let case = config.case()?;
    if case.exact.is_none() {
        return Err(Error::Config(format!("case: '{}' has no exact solution", config.case_name)));
    }
    let one = |n: usize| -> Result<ErrorRecord> { error_at_final_time(&run_one(config, n)?, &case) };
    if config.parallel {
        let one = &one;
        std::thread::scope(|scope| {
            let handles: Vec<_> = config.mesh_sizes.iter().map(|&n| scope.spawn(move || one(n))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Solver("worker thread panicked".into()))))
                .collect()
        })
    } else {
        config.mesh_sizes.iter().map(|&n| one(n)).collect()
    }
}

pub fn converge_report(config: &RunConfiguration, format: OutputFormat) -> Result<String> {
    let table = convergence_rates(convergence_records(config)?)?;
    Ok(match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Markdown => table.to_markdown(config.law.derived_exponents().beta),
    })
}

/// One line per property; returns the text and whether every property passed.
pub fn verify_report(law: &GeneralizedPolynomial, seed: u64) -> Result<(String, bool)> {
    let outcomes = run_property_suite(law, seed, SuiteSize::default())?;
    let mut out = String::new();
    let mut all = true;
    for o in &outcomes {
        all &= o.passed;
        let _ = writeln!(
            out,
            "{} {:<32} samples={:<8} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.samples,
            o.detail
        );
    }
    Ok((out, all))
}

fn execute(cli: &Cli) -> Result<i32> {
    match cli.command {
        Command::Solve => {
            let config = load_config(cli)?;
            let text = solve_report(&config, format_of(cli, &config.output))?;
            emit(cli, &config.output, &text)?;
            Ok(EXIT_OK)
        }
        Command::Converge => {
            let config = load_config(cli)?;
            let text = converge_report(&config, format_of(cli, &config.output))?;
            emit(cli, &config.output, &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let (law, output) = match &cli.config {
                Some(path) => RunConfiguration::law_settings_from_path(path)?,
                None => (GeneralizedPolynomial::forchheimer_two_term(), OutputConfig::default()),
            };
            let (text, passed) = verify_report(&law, cli.seed)?;
            emit(cli, &output, &text)?;
            Ok(if passed { EXIT_OK } else { EXIT_PROPERTY_FAILURE })
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
