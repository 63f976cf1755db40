use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polent::Complex64;

/// Parses `re,im` (or a bare real).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("expected `re,im`, got {s:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re,im`, got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "polent", version, about = "Polarization entanglement of bright squeezed beams and its purification")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Emit a single JSON document instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Squeezing parameter for `point` and `sample`.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Probe coherent amplitude as `re,im`.
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true, value_name = "RE,IM")]
    pub probe_amp: Option<Complex64>,
    /// Cross-Kerr phase per photon.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phase_shift: Option<f64>,
    /// Photon-number cutoff (exact oracle per-mode cutoff; Schmidt-term cap for protocol B).
    #[arg(long, global = true)]
    pub fock_cutoff: Option<usize>,
    #[arg(long, global = true)]
    pub tail_epsilon: Option<f64>,
    /// Half-width of the square outcome grid (default |probe| + 6).
    #[arg(long, global = true)]
    pub grid_radius: Option<f64>,
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fig3Mode {
    Printed,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    A,
    B,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Degree of inseparability of the squeezed input against λ.
    Fig2 {
        #[arg(long, default_value_t = 0.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 0.99)]
        lambda_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Degree of inseparability after measuring J photons.
    Fig3 {
        /// Largest J (default 20 printed, 6 otherwise).
        #[arg(long)]
        j_max: Option<u32>,
        #[arg(long, value_enum, default_value_t = Fig3Mode::Printed)]
        mode: Fig3Mode,
        /// Emit degenerate exact cells as empty instead of failing.
        #[arg(long)]
        allow_degenerate: bool,
        /// Carrier intensity α² of the balanced configuration; 0 keeps the state undisplaced.
        #[arg(long, default_value_t = 1.0)]
        intensity: f64,
    },
    /// Efficiency of cross-Kerr purification against λ.
    Fig4 {
        #[arg(long, default_value_t = 0.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 0.8)]
        lambda_max: f64,
        #[arg(long, default_value_t = 17)]
        steps: usize,
        /// Explicit λ values, overriding the range.
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
        /// Keep rows whose quadrature fails the refinement check, flagged `not_converged`.
        #[arg(long)]
        allow_unconverged: bool,
        #[arg(long)]
        no_refinement_check: bool,
    },
    /// Single-λ summary, optionally at one probe outcome β.
    Point {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, value_name = "RE,IM")]
        beta: Option<Complex64>,
        /// Also integrate the protocol-B efficiency.
        #[arg(long)]
        efficiency: bool,
    },
    /// Seeded measurement outcomes of either protocol.
    Sample {
        #[arg(long, value_enum, default_value_t = Protocol::A)]
        protocol: Protocol,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
}
