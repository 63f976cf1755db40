//! Schmidt projection by a total-photon-number measurement on beam `x`.
//!
//! Measuring `J` photons in `H_x + V_x` projects the two-pair squeezed vacuum
//! onto `|J> = (J+1)^{-1/2} sum_n |n,n>_H |J-n,J-n>_V`, with probability
//! `(J+1) λ^{2J} (1 - λ²)²`.
//!
//! The exact oracle evaluates the quadratic Stokes operators on the bright
//! post-measurement state, i.e. `|J>` with every mode displaced by its beam
//! carrier, in a truncated Fock space. No linearization is involved.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fock::{displaced_number_state, expectation_real, variance_min_pm, FockSpace, FockVector};
use crate::insep::InsepReport;
use crate::stokes::{build_stokes, BeamConfig, Stokes, BEAM_X, BEAM_Y};

type C64 = Complex64;

/// Minimum photons of headroom above `J` in every mode.
pub const MIN_MARGIN: usize = 2;
/// Truncation loss allowed per displaced number state when choosing a cutoff automatically.
pub const TRUNCATION_LOSS: f64 = 1e-13;
const DEGENERATE_COMM: f64 = 1e-12;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    Ok(())
}

/// `P(J) = (J+1) λ^{2J} (1 - λ²)²`.
pub fn outcome_prob(lambda: f64, j: u32) -> Result<f64> {
    check_lambda(lambda)?;
    let x = lambda * lambda;
    Ok(f64::from(j + 1) * x.powi(j as i32) * (1.0 - x).powi(2))
}

/// `P(J <= k) = 1 - λ^{2(k+1)} [(k+2) - (k+1) λ²]`.
pub fn outcome_cdf(lambda: f64, k: u32) -> Result<f64> {
    check_lambda(lambda)?;
    let x = lambda * lambda;
    let kf = f64::from(k);
    Ok(1.0 - x.powi(k as i32 + 1) * ((kf + 2.0) - (kf + 1.0) * x))
}

/// Mean of `J`: `2λ² / (1 - λ²)`.
pub fn outcome_mean(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let x = lambda * lambda;
    Ok(2.0 * x / (1.0 - x))
}

/// Inverse-CDF draw of the measured photon number.
pub fn sample_outcome<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u32> {
    check_lambda(lambda)?;
    let u: f64 = rng.random();
    let mut k = 0;
    while outcome_cdf(lambda, k)? < u {
        k += 1;
    }
    Ok(k)
}

/// `count` draws, sample `i` on its own ChaCha stream `i` under `seed`.
pub fn sample_outcomes(lambda: f64, seed: u64, count: usize, exec: Execution) -> Result<Vec<u32>> {
    check_lambda(lambda)?;
    map_indexed(count, exec, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        sample_outcome(lambda, &mut rng)
    })
    .into_iter()
    .collect()
}

/// Undisplaced `|J>` on four modes `(H_x, H_y, V_x, V_y)`, each truncated at `J + margin`.
pub fn build_j_state(j: usize, margin: usize) -> Result<FockVector> {
    if margin < MIN_MARGIN {
        return Err(Error::MarginTooSmall(margin));
    }
    let space = FockSpace::uniform(4, j + margin)?;
    let mut psi = FockVector::zeros(space.clone());
    let amp = C64::new(1.0 / ((j + 1) as f64).sqrt(), 0.0);
    let dim = space.mode_dim(0);
    let basis = |n: usize| {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[n] = C64::new(1.0, 0.0);
        v
    };
    for n in 0..=j {
        let (h, v) = (basis(n), basis(j - n));
        psi.add_product(amp, &[&h, &h, &v, &v])?;
    }
    Ok(psi)
}

/// Smallest per-mode headroom above `J` keeping `D(a)|n>` for all carriers `a`
/// and `n <= J` within [`TRUNCATION_LOSS`].
pub fn auto_margin(j: usize, config_x: &BeamConfig, config_y: &BeamConfig) -> usize {
    let amps = [config_x.amp_h, config_x.amp_v, config_y.amp_h, config_y.amp_v];
    let mut margin = MIN_MARGIN;
    loop {
        let cutoff = j + margin;
        let ok = amps.iter().all(|&a| {
            (0..=j).all(|n| {
                let v = displaced_number_state(C64::new(a, 0.0), n, cutoff);
                1.0 - v.iter().map(|z| z.norm_sqr()).sum::<f64>() < TRUNCATION_LOSS
            })
        });
        if ok {
            return margin;
        }
        margin += 1;
    }
}

/// `|J>` with each mode displaced by its beam carrier.
pub fn build_bright_j_state(
    j: usize,
    config_x: &BeamConfig,
    config_y: &BeamConfig,
    margin: usize,
) -> Result<FockVector> {
    if margin < MIN_MARGIN {
        return Err(Error::MarginTooSmall(margin));
    }
    let cutoff = j + margin;
    let space = FockSpace::uniform(4, cutoff)?;
    let mut psi = FockVector::zeros(space);
    let amp = C64::new(1.0 / ((j + 1) as f64).sqrt(), 0.0);
    let disp = |a: f64, n: usize| displaced_number_state(C64::new(a, 0.0), n, cutoff);
    for n in 0..=j {
        let hx = disp(config_x.amp_h, n);
        let hy = disp(config_y.amp_h, n);
        let vx = disp(config_x.amp_v, j - n);
        let vy = disp(config_y.amp_v, j - n);
        psi.add_product(amp, &[&hx, &hy, &vx, &vy])?;
    }
    Ok(psi)
}

/// One Stokes pair of the exact oracle; `report` is `Err(DegenerateDenominator)`
/// when the commutator mean vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub pair: (Stokes, Stokes),
    pub report: Result<InsepReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactReport {
    pub j: usize,
    pub cutoff: usize,
    pub norm_sqr: f64,
    pub pairs: Vec<PairResult>,
}

impl ExactReport {
    pub fn degree(&self, a: Stokes, b: Stokes) -> Option<f64> {
        self.pairs.iter().find(|p| p.pair == (a, b)).and_then(|p| p.report.as_ref().ok()).map(|r| r.degree)
    }
}

/// Stokes pairs `(S1,S2)`, `(S1,S3)`, `(S2,S3)` in output order.
pub const PAIRS: [(Stokes, Stokes); 3] = [(Stokes::S1, Stokes::S2), (Stokes::S1, Stokes::S3), (Stokes::S2, Stokes::S3)];

/// Exact degree of inseparability for every Stokes pair on the bright `|J>`,
/// with an automatically chosen cutoff.
pub fn i_of_j_exact(j: usize, config_x: &BeamConfig, config_y: &BeamConfig) -> Result<ExactReport> {
    i_of_j_exact_with_margin(j, config_x, config_y, auto_margin(j, config_x, config_y))
}

/// The commutator term is the mean of its two beams, `(|<[Si,Sj]>_x| + |<[Si,Sj]>_y|)/2`,
/// which makes the degree identical to the general bound with unit weights.
pub fn i_of_j_exact_with_margin(
    j: usize,
    config_x: &BeamConfig,
    config_y: &BeamConfig,
    margin: usize,
) -> Result<ExactReport> {
    let psi = build_bright_j_state(j, config_x, config_y, margin)?;
    let space = psi.space().clone();
    let ops = |cfg: &BeamConfig, beam| Stokes::POLARIZATION.map(|s| build_stokes(&space, cfg, s, beam));
    let (ox, oy) = (ops(config_x, BEAM_X), ops(config_y, BEAM_Y));
    let ox = ox.into_iter().collect::<Result<Vec<_>>>()?;
    let oy = oy.into_iter().collect::<Result<Vec<_>>>()?;
    let pm = (0..3).map(|k| variance_min_pm(&psi, &ox[k], &oy[k])).collect::<Result<Vec<_>>>()?;
    let idx = |s: Stokes| s.index() - 1;
    let comm = |ops: &[crate::fock::FockOperator], a: usize, b: usize| -> Result<f64> {
        // <[A, B]> = 2i Im <A psi | B psi>
        let ap = ops[a].apply(&psi)?;
        let bp = ops[b].apply(&psi)?;
        Ok(2.0 * ap.inner(&bp)?.im.abs())
    };
    // Sanity: means are real for the Hermitian Stokes operators.
    for op in ox.iter().chain(&oy) {
        expectation_real(&psi, op)?;
    }
    let mut pairs = Vec::with_capacity(3);
    for &(a, b) in &PAIRS {
        let (ia, ib) = (idx(a), idx(b));
        let comm_abs = 0.5 * (comm(&ox, ia, ib)? + comm(&oy, ia, ib)?);
        let report = if comm_abs < DEGENERATE_COMM {
            Err(Error::DegenerateDenominator { comm_abs })
        } else {
            InsepReport::new(pm[ia].0, pm[ia].1, pm[ib].0, pm[ib].1, comm_abs)
        };
        pairs.push(PairResult { pair: (a, b), report });
    }
    Ok(ExactReport { j, cutoff: j + margin, norm_sqr: psi.norm_sqr(), pairs })
}

/// Exact reports for `J = 0..=j_max`, ordered by `J`.
pub fn i_of_j_sweep(
    j_max: usize,
    config_x: &BeamConfig,
    config_y: &BeamConfig,
    exec: Execution,
) -> Result<Vec<ExactReport>> {
    map_indexed(j_max + 1, exec, |j| i_of_j_exact(j, config_x, config_y)).into_iter().collect()
}
