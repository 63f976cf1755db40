//! Command-line front end for `polent`: figure sweeps as CSV or JSON,
//! single-point summaries and seeded sampling.
//!
//! [`render`] runs one parsed invocation and returns the text; [`write`]
//! sends it to the configured destination. Both are usable in-process.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
mod error;
pub mod output;

use std::io::Write as _;
use std::path::PathBuf;

pub use args::Cli;
pub use config::RunConfig;
pub use error::CliError;

use args::Command;

pub const THREADS_ENV: &str = "POLENT_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub out: Option<PathBuf>,
}

pub fn render(cli: &Cli) -> Result<Rendered, CliError> {
    let cfg = RunConfig::resolve(&cli.common)?;
    let table = match &cli.command {
        Command::Fig2 { lambda_min, lambda_max, steps } => commands::fig2(*lambda_min, *lambda_max, *steps)?,
        Command::Fig3 { j_max, mode, allow_degenerate, intensity } => {
            commands::fig3(&cfg, *j_max, *mode, *allow_degenerate, *intensity)?
        }
        Command::Fig4 { lambda_min, lambda_max, steps, lambdas, allow_unconverged, no_refinement_check } => {
            let lams = commands::fig4_lambdas(*lambda_min, *lambda_max, *steps, lambdas)?;
            commands::fig4(&cfg, &lams, !no_refinement_check, *allow_unconverged)?
        }
        Command::Point { beta, efficiency } => commands::point(&cfg, *beta, *efficiency)?,
        Command::Sample { protocol, count } => commands::sample(&cfg, *protocol, *count)?,
    };
    let text = if cli.common.json { table.to_json(&cfg) } else { table.to_csv() };
    Ok(Rendered { text, out: cfg.out })
}

pub fn write(rendered: &Rendered) -> Result<(), CliError> {
    match &rendered.out {
        Some(path) => {
            std::fs::write(path, &rendered.text).map_err(|source| CliError::Io { path: path.clone(), source })
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(rendered.text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Io { path: PathBuf::from("<stdout>"), source: e })
                }
                _ => Ok(()),
            }
        }
    }
}

/// Worker count from `POLENT_THREADS`; unset or 0 means automatic.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Config(format!("{THREADS_ENV} must be a nonnegative integer, got {v:?}"))),
        },
    }
}

pub fn configure_threads() -> Result<(), CliError> {
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}
