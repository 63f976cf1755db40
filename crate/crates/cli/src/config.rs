//! Run configuration: defaults, then a flat `key = value` file, then flags.

use std::path::{Path, PathBuf};

use ini::Ini;
use polent::protocol_b::{GridSpec, KerrSetup, DEFAULT_GRID_POINTS, DEFAULT_REFINEMENT_TOL};
use polent::Complex64;
use serde_json::{json, Value};

use crate::args::CommonArgs;
use crate::error::CliError;

pub const KEYS: [&str; 10] = [
    "lambda",
    "probe_amp_re",
    "probe_amp_im",
    "phase_shift",
    "fock_cutoff",
    "tail_epsilon",
    "grid_radius",
    "grid_points",
    "seed",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lam: f64,
    pub probe_amp: Complex64,
    pub phase_shift: f64,
    /// Photon-number cutoff. Per-mode Fock cutoff of the exact oracle, and cap
    /// on Schmidt terms per outcome in protocol B. `None` picks automatically.
    pub fock_cutoff: Option<usize>,
    pub tail_epsilon: f64,
    /// `None` means `|α| + 6`.
    pub grid_radius: Option<f64>,
    pub grid_points: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lam: 0.5,
            probe_amp: Complex64::new(3.0, 0.0),
            phase_shift: 0.1,
            fock_cutoff: None,
            tail_epsilon: polent::insep::DEFAULT_TAIL_EPSILON,
            grid_radius: None,
            grid_points: DEFAULT_GRID_POINTS,
            seed: 0,
            out: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| CliError::Config(format!("bad value {value:?} for key {key}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "lambda" => self.lam = parse(key, value)?,
            "probe_amp_re" => self.probe_amp.re = parse(key, value)?,
            "probe_amp_im" => self.probe_amp.im = parse(key, value)?,
            "probe_amp" => {
                self.probe_amp =
                    crate::args::parse_complex(value).map_err(|e| CliError::Config(format!("probe_amp: {e}")))?
            }
            "phase_shift" => self.phase_shift = parse(key, value)?,
            "fock_cutoff" => self.fock_cutoff = Some(parse(key, value)?),
            "tail_epsilon" => self.tail_epsilon = parse(key, value)?,
            "grid_radius" => self.grid_radius = Some(parse(key, value)?),
            "grid_points" => self.grid_points = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(CliError::Config(format!("unknown key {key:?} (expected one of {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn apply_ini(&mut self, text: &str) -> Result<(), CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for (section, props) in ini.iter() {
            if let Some(name) = section {
                return Err(CliError::Config(format!("sections are not supported (found [{name}])")));
            }
            for (k, v) in props.iter() {
                self.set(k, v)?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        let mut cfg = Self::default();
        cfg.apply_ini(&text)?;
        Ok(cfg)
    }

    /// File (if any) overridden by flags.
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        if let Some(v) = args.lambda {
            cfg.lam = v;
        }
        if let Some(v) = args.probe_amp {
            cfg.probe_amp = v;
        }
        if let Some(v) = args.phase_shift {
            cfg.phase_shift = v;
        }
        if let Some(v) = args.fock_cutoff {
            cfg.fock_cutoff = Some(v);
        }
        if let Some(v) = args.tail_epsilon {
            cfg.tail_epsilon = v;
        }
        if let Some(v) = args.grid_radius {
            cfg.grid_radius = Some(v);
        }
        if let Some(v) = args.grid_points {
            cfg.grid_points = v;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if let Some(v) = &args.out {
            cfg.out = Some(v.clone());
        }
        Ok(cfg)
    }

    pub fn kerr_setup(&self, lam: f64) -> Result<KerrSetup, CliError> {
        let mut setup = KerrSetup::with_tolerance(self.probe_amp, self.phase_shift, lam, self.tail_epsilon)?;
        if let Some(n) = self.fock_cutoff {
            setup.cutoff = n.max(1);
        }
        Ok(setup)
    }

    pub fn grid(&self, setup: &KerrSetup, check_refinement: bool) -> GridSpec {
        GridSpec {
            radius: self.grid_radius.unwrap_or(setup.probe_amp.norm() + 6.0),
            points: self.grid_points,
            check_refinement,
            rel_tol: DEFAULT_REFINEMENT_TOL,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lambda": self.lam,
            "probe_amp_re": self.probe_amp.re,
            "probe_amp_im": self.probe_amp.im,
            "phase_shift": self.phase_shift,
            "fock_cutoff": self.fock_cutoff,
            "tail_epsilon": self.tail_epsilon,
            "grid_radius": self.grid_radius,
            "grid_points": self.grid_points,
            "seed": self.seed,
            "out": self.out.as_ref().map(|p| p.display().to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let mut cfg = RunConfig::default();
        cfg.apply_ini("# comment\nlambda = 0.3\nprobe_amp_re=2.5\nprobe_amp_im = -0.5\nseed = 42\nout = a.csv\n")
            .unwrap();
        assert_eq!(cfg.lam, 0.3);
        assert_eq!(cfg.probe_amp, Complex64::new(2.5, -0.5));
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.out, Some(PathBuf::from("a.csv")));
        cfg.apply_ini("probe_amp = 1,2").unwrap();
        assert_eq!(cfg.probe_amp, Complex64::new(1.0, 2.0));
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.apply_ini("lamda = 0.3"), Err(CliError::Config(_))));
        assert!(matches!(cfg.apply_ini("[run]\nlambda = 0.3"), Err(CliError::Config(_))));
        assert!(matches!(cfg.apply_ini("grid_points = many"), Err(CliError::Config(_))));
    }
}
