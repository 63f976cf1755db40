use polent::exec::map_indexed;
use polent::insep::{i_j_printed, i_lambda, threshold_lambda};
use polent::protocol_a::{self, i_of_j_exact, i_of_j_exact_with_margin, ExactReport, PAIRS};
use polent::protocol_b::{self, efficiency, EfficiencyResult, Gamma, Upsilon};
use polent::stokes::{balanced_config, BeamConfig};
use polent::{Complex64, Error, Execution};

use crate::args::{Fig3Mode, Protocol};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Largest `J` accepted by the exact oracle.
pub const EXACT_J_MAX: u32 = 8;

fn check_lambda(lam: f64) -> Result<(), CliError> {
    if (0.0..1.0).contains(&lam) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("λ = {lam} outside [0, 1)")))
    }
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect(),
    }
}

pub fn fig2(lambda_min: f64, lambda_max: f64, steps: usize) -> Result<Table, CliError> {
    if !(lambda_min >= 0.0 && lambda_min < lambda_max && lambda_max < 1.0) {
        return Err(CliError::Usage(format!(
            "need 0 <= lambda-min < lambda-max < 1, got [{lambda_min}, {lambda_max}]"
        )));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("need at least 2 steps, got {steps}")));
    }
    let mut lams = linspace(lambda_min, lambda_max, steps);
    // The crossing I = 1 gets its own row.
    let t = threshold_lambda();
    if t > lambda_min && t < lambda_max && !lams.contains(&t) {
        let at = lams.partition_point(|&l| l < t);
        lams.insert(at, t);
    }
    let mut table = Table::new("fig2", vec!["lambda", "I", "entangled"]);
    for lam in lams {
        let i = i_lambda(lam)?;
        table.push(vec![Cell::Num(lam), Cell::Num(i), Cell::Bool(i < 1.0)]);
    }
    Ok(table)
}

fn fig3_configs(intensity: f64) -> Result<(BeamConfig, BeamConfig), CliError> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(CliError::Usage(format!("intensity must be finite and nonnegative, got {intensity}")));
    }
    if intensity == 0.0 {
        let (x, y) = balanced_config(1.0)?;
        Ok((x.dark(), y.dark()))
    } else {
        Ok(balanced_config(intensity)?)
    }
}

fn exact_reports(j_max: u32, cfg: &RunConfig, x: &BeamConfig, y: &BeamConfig) -> Result<Vec<ExactReport>, CliError> {
    let reports = map_indexed(j_max as usize + 1, Execution::Parallel, |j| match cfg.fock_cutoff {
        Some(cutoff) => i_of_j_exact_with_margin(j, x, y, cutoff.saturating_sub(j)),
        None => i_of_j_exact(j, x, y),
    });
    Ok(reports.into_iter().collect::<polent::Result<Vec<_>>>()?)
}

pub fn fig3(
    cfg: &RunConfig,
    j_max: Option<u32>,
    mode: Fig3Mode,
    allow_degenerate: bool,
    intensity: f64,
) -> Result<Table, CliError> {
    let exact = mode != Fig3Mode::Printed;
    let j_max = j_max.unwrap_or(if exact { 6 } else { 20 });
    if exact && j_max > EXACT_J_MAX {
        return Err(CliError::Usage(format!("exact mode is limited to J <= {EXACT_J_MAX}, got {j_max}")));
    }
    let mut columns = vec!["J"];
    if mode != Fig3Mode::Exact {
        columns.push("I_printed");
    }
    if exact {
        columns.extend(["I_exact_S1S2", "I_exact_S1S3", "I_exact_S2S3", "flags"]);
    }
    let reports = if exact {
        let (x, y) = fig3_configs(intensity)?;
        exact_reports(j_max, cfg, &x, &y)?
    } else {
        Vec::new()
    };
    let mut table = Table::new("fig3", columns);
    for j in 0..=j_max {
        let mut row = vec![Cell::Int(u64::from(j))];
        if mode != Fig3Mode::Exact {
            row.push(Cell::Num(i_j_printed(j)));
        }
        if exact {
            let mut flags = Vec::new();
            for (pair, (a, b)) in reports[j as usize].pairs.iter().zip(PAIRS) {
                match &pair.report {
                    Ok(r) => row.push(Cell::Num(r.degree)),
                    Err(Error::DegenerateDenominator { .. }) if allow_degenerate => {
                        row.push(Cell::Empty);
                        if !flags.contains(&"degenerate") {
                            flags.push("degenerate");
                        }
                    }
                    Err(e @ Error::DegenerateDenominator { .. }) => {
                        return Err(CliError::Numerical(format!(
                            "J={j} pair ({a:?},{b:?}): {e}; rerun with --allow-degenerate to emit empty cells"
                        )))
                    }
                    Err(e) => return Err(e.clone().into()),
                }
            }
            row.push(Cell::Flags(flags));
        }
        table.push(row);
    }
    Ok(table)
}

fn upsilon_cell(u: Upsilon) -> Cell {
    match u {
        Upsilon::Finite(v) => Cell::Num(v),
        Upsilon::Infinite => Cell::Inf,
        Upsilon::Undefined => Cell::Empty,
    }
}

fn efficiency_flags(r: &EfficiencyResult) -> Vec<&'static str> {
    if r.singular {
        vec!["singular"]
    } else if r.omega_empty {
        vec!["omega_empty"]
    } else {
        Vec::new()
    }
}

/// Efficiency at one λ. Non-convergence is an error unless allowed, in which
/// case the unchecked result is returned flagged `not_converged`.
fn efficiency_point(
    cfg: &RunConfig,
    lam: f64,
    check: bool,
    allow_unconverged: bool,
) -> Result<(EfficiencyResult, Vec<&'static str>), CliError> {
    check_lambda(lam)?;
    let setup = cfg.kerr_setup(lam)?;
    match efficiency(&setup, &cfg.grid(&setup, check), Execution::Parallel) {
        Ok(r) => {
            let flags = efficiency_flags(&r);
            Ok((r, flags))
        }
        Err(Error::QuadratureNotConverged { .. }) if allow_unconverged => {
            let r = efficiency(&setup, &cfg.grid(&setup, false), Execution::Parallel)?;
            let mut flags = efficiency_flags(&r);
            flags.push("not_converged");
            Ok((r, flags))
        }
        Err(e) => Err(CliError::Numerical(format!("λ = {lam}: {e}"))),
    }
}

pub fn fig4(
    cfg: &RunConfig,
    lambdas: &[f64],
    check_refinement: bool,
    allow_unconverged: bool,
) -> Result<Table, CliError> {
    let mut table = Table::new("fig4", vec!["lambda", "upsilon", "xi", "omega_fraction", "flags"]);
    for &lam in lambdas {
        let (r, flags) = efficiency_point(cfg, lam, check_refinement, allow_unconverged)?;
        table.push(vec![
            Cell::Num(lam),
            upsilon_cell(r.upsilon),
            r.xi.map_or(Cell::Empty, Cell::Num),
            Cell::Num(r.omega_fraction),
            Cell::Flags(flags),
        ]);
    }
    Ok(table)
}

pub fn fig4_lambdas(lambda_min: f64, lambda_max: f64, steps: usize, explicit: &[f64]) -> Result<Vec<f64>, CliError> {
    let lams = if explicit.is_empty() {
        if !(lambda_min <= lambda_max) || steps == 0 {
            return Err(CliError::Usage(format!("bad λ range [{lambda_min}, {lambda_max}] with {steps} steps")));
        }
        linspace(lambda_min, lambda_max, steps)
    } else {
        explicit.to_vec()
    };
    lams.iter().try_for_each(|&l| check_lambda(l))?;
    Ok(lams)
}

fn gamma_cell(g: Gamma) -> Cell {
    match g {
        Gamma::Finite(v) => Cell::Num(v),
        Gamma::Infinite => Cell::Inf,
    }
}

pub fn point(cfg: &RunConfig, beta: Option<Complex64>, with_efficiency: bool) -> Result<Table, CliError> {
    let lam = cfg.lam;
    check_lambda(lam)?;
    let mut table = Table::new("point", vec!["quantity", "value"]);
    let mut put = |k: &str, v: Cell| table.push(vec![Cell::Text(k.into()), v]);
    let i = i_lambda(lam)?;
    put("lambda", Cell::Num(lam));
    put("I", Cell::Num(i));
    put("entangled", Cell::Bool(i < 1.0));
    put("threshold_lambda", Cell::Num(threshold_lambda()));
    put("protocol_a_p_j0", Cell::Num(protocol_a::outcome_prob(lam, 0)?));
    put("protocol_a_mean_j", Cell::Num(protocol_a::outcome_mean(lam)?));
    if let Some(beta) = beta {
        let o = protocol_b::outcome(beta, &cfg.kerr_setup(lam)?)?;
        put("beta_re", Cell::Num(beta.re));
        put("beta_im", Cell::Num(beta.im));
        put("q", Cell::Num(o.q));
        put("I_beta", Cell::Num(o.i_after));
        put("gamma", gamma_cell(o.gamma));
    }
    if with_efficiency {
        let (r, flags) = efficiency_point(cfg, lam, true, false)?;
        put("upsilon", upsilon_cell(r.upsilon));
        put("xi", r.xi.map_or(Cell::Empty, Cell::Num));
        put("omega_fraction", Cell::Num(r.omega_fraction));
        put("flags", Cell::Flags(flags));
    }
    Ok(table)
}

pub fn sample(cfg: &RunConfig, protocol: Protocol, count: usize) -> Result<Table, CliError> {
    check_lambda(cfg.lam)?;
    match protocol {
        Protocol::A => {
            let draws = protocol_a::sample_outcomes(cfg.lam, cfg.seed, count, Execution::Parallel)?;
            let mut table = Table::new("sample", vec!["index", "J"]);
            for (k, j) in draws.into_iter().enumerate() {
                table.push(vec![Cell::Int(k as u64), Cell::Int(u64::from(j))]);
            }
            Ok(table)
        }
        Protocol::B => {
            let setup = cfg.kerr_setup(cfg.lam)?;
            let betas = protocol_b::sample_betas(&setup, cfg.seed, count, Execution::Parallel)?;
            let outcomes = map_indexed(count, Execution::Parallel, |k| protocol_b::outcome(betas[k], &setup));
            let mut table = Table::new("sample", vec!["index", "beta_re", "beta_im", "q", "I", "gamma"]);
            for (k, res) in outcomes.into_iter().enumerate() {
                let o = res?;
                table.push(vec![
                    Cell::Int(k as u64),
                    Cell::Num(o.beta.re),
                    Cell::Num(o.beta.im),
                    Cell::Num(o.q),
                    Cell::Num(o.i_after),
                    gamma_cell(o.gamma),
                ]);
            }
            Ok(table)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_has_threshold_row() {
        let t = fig2(0.0, 0.99, 200).unwrap();
        assert_eq!(t.rows.len(), 201);
        assert!(t.rows.iter().any(|r| r[0] == Cell::Num(threshold_lambda())));
        assert!(matches!(fig2(0.5, 0.2, 10), Err(CliError::Usage(_))));
        assert!(matches!(fig2(0.0, 1.0, 10), Err(CliError::Usage(_))));
    }

    #[test]
    fn fig3_guards() {
        let cfg = RunConfig::default();
        assert!(matches!(fig3(&cfg, Some(9), Fig3Mode::Exact, false, 1.0), Err(CliError::Usage(_))));
        let dark = fig3(&cfg, Some(1), Fig3Mode::Both, false, 0.0);
        assert!(matches!(dark, Err(CliError::Numerical(_))), "{dark:?}");
        let t = fig3(&cfg, Some(1), Fig3Mode::Both, true, 0.0).unwrap();
        assert_eq!(t.rows[1][5], Cell::Flags(vec!["degenerate"]));
        assert_eq!(t.rows[1][2], Cell::Empty);
    }

    #[test]
    fn fig3_cutoff_below_margin_is_usage_error() {
        let cfg = RunConfig { fock_cutoff: Some(3), ..RunConfig::default() };
        assert!(matches!(fig3(&cfg, Some(2), Fig3Mode::Exact, false, 1.0), Err(CliError::Usage(_))));
    }

    #[test]
    fn fig4_lambda_validation() {
        assert_eq!(fig4_lambdas(0.0, 0.8, 17, &[]).unwrap().len(), 17);
        assert!(fig4_lambdas(0.0, 1.0, 3, &[]).is_err());
        assert_eq!(fig4_lambdas(0.0, 0.0, 1, &[0.3, 0.1]).unwrap(), vec![0.3, 0.1]);
    }

    #[test]
    fn fig4_special_rows() {
        let cfg = RunConfig { grid_points: 41, ..RunConfig::default() };
        let t = fig4(&cfg, &[0.0, 0.15], false, false).unwrap();
        assert_eq!(t.rows[0][2], Cell::Empty);
        assert_eq!(t.rows[0][4], Cell::Flags(vec!["singular"]));
        assert_eq!(t.rows[1][1], Cell::Inf);
        assert_eq!(t.rows[1][2], Cell::Num(1.0));
    }
}
