//! Stokes operators of a two-polarization beam.
//!
//! `S0 = nH + nV`, `S1 = nH - nV`,
//! `S2 = aH^† aV e^{iθ} + aV^† aH e^{-iθ}`,
//! `S3 = i aV^† aH e^{-iθ} - i aH^† aV e^{iθ}`.
//!
//! Two beams `x` and `y` share a four-mode layout `(H_x, H_y, V_x, V_y)`, so the
//! H pair and the V pair are each a contiguous two-mode block.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{displaced_number_state, FockOperator, FockSpace, FockVector};
use crate::gaussian::{GaussianState, QuadraticObservable};

type C64 = Complex64;

pub const MODE_HX: usize = 0;
pub const MODE_HY: usize = 1;
pub const MODE_VX: usize = 2;
pub const MODE_VY: usize = 3;

/// `(H, V)` mode indices of each beam in the four-mode layout.
pub const BEAM_X: [usize; 2] = [MODE_HX, MODE_VX];
pub const BEAM_Y: [usize; 2] = [MODE_HY, MODE_VY];

/// Carrier amplitudes and phase difference of one beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    pub amp_h: f64,
    pub amp_v: f64,
    pub theta: f64,
}

impl BeamConfig {
    pub fn new(amp_h: f64, amp_v: f64, theta: f64) -> Result<Self> {
        let ok = |a: f64| a.is_finite() && a >= 0.0;
        if !ok(amp_h) || !ok(amp_v) || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beam amplitudes must be finite and nonnegative (got {amp_h}, {amp_v}, theta {theta})"
            )));
        }
        Ok(Self { amp_h, amp_v, theta })
    }

    /// Intensity-free copy with the same phase, for undisplaced states.
    pub fn dark(self) -> Self {
        Self { amp_h: 0.0, amp_v: 0.0, ..self }
    }
}

/// Stokes label `S0..S3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stokes {
    S0,
    S1,
    S2,
    S3,
}

impl Stokes {
    pub const ALL: [Stokes; 4] = [Stokes::S0, Stokes::S1, Stokes::S2, Stokes::S3];
    pub const POLARIZATION: [Stokes; 3] = [Stokes::S1, Stokes::S2, Stokes::S3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(which: usize) -> Result<Self> {
        Self::ALL
            .get(which)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("Stokes index {which} not in 0..=3")))
    }
}

/// Hermitian coefficient matrix over `(aH, aV)`.
pub fn stokes_quadratic(config: &BeamConfig, which: Stokes) -> QuadraticObservable {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let phase = C64::from_polar(1.0, config.theta);
    let i = C64::new(0.0, 1.0);
    let (hh, hv, vh, vv) = match which {
        Stokes::S0 => (one, z, z, one),
        Stokes::S1 => (one, z, z, -one),
        Stokes::S2 => (z, phase, phase.conj(), z),
        Stokes::S3 => (z, -i * phase, i * phase.conj(), z),
    };
    let coeff = DMatrix::from_row_slice(2, 2, &[hh, hv, vh, vv]);
    QuadraticObservable::new(coeff, 0.0).expect("Stokes forms are Hermitian")
}

/// Stokes observable of one beam embedded in the four-mode layout.
pub fn beam_stokes(config: &BeamConfig, which: Stokes, beam: [usize; 2]) -> QuadraticObservable {
    stokes_quadratic(config, which).embed(4, &beam).expect("layout indices in range")
}

/// Builds `sum_jk H_jk a_j^† a_k` on a truncated Fock space, local mode `k` on `modes[k]`.
pub fn fock_quadratic(obs: &QuadraticObservable, space: &FockSpace, modes: &[usize]) -> Result<FockOperator> {
    if modes.len() != obs.n_modes() {
        return Err(Error::DimensionMismatch { expected: obs.n_modes(), found: modes.len() });
    }
    let lowering = modes
        .iter()
        .map(|&m| {
            if m >= space.n_modes() {
                return Err(Error::ModeOutOfRange { index: m, n_modes: space.n_modes() });
            }
            FockOperator::ladder(space.cutoffs()[m])?.embed(m, space)
        })
        .collect::<Result<Vec<_>>>()?;
    let raising: Vec<FockOperator> = lowering.iter().map(FockOperator::adjoint).collect();
    let mut total = FockOperator::identity(space.clone()).scale(C64::new(obs.constant(), 0.0));
    for (j, up) in raising.iter().enumerate() {
        for (k, down) in lowering.iter().enumerate() {
            let h = obs.coeff()[(j, k)];
            if h != C64::new(0.0, 0.0) {
                total = total.add(&up.mul(down)?.scale(h))?;
            }
        }
    }
    Ok(total)
}

/// Exact Stokes operator on the Fock space with `(H, V)` on `beam`.
pub fn build_stokes(space: &FockSpace, config: &BeamConfig, which: Stokes, beam: [usize; 2]) -> Result<FockOperator> {
    fock_quadratic(&stokes_quadratic(config, which), space, &beam)
}

/// First-order expansion of a Stokes operator around real carriers.
///
/// `coeffs` multiply `(dX+_H, dX-_H, dX+_V, dX-_V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedStokes {
    pub mean: f64,
    pub coeffs: [f64; 4],
}

impl LinearizedStokes {
    /// Coefficient vector over the quadratures of an `n_modes` layout.
    pub fn quadrature_coeffs(&self, beam: [usize; 2], n_modes: usize) -> Vec<f64> {
        let mut l = vec![0.0; 2 * n_modes];
        l[2 * beam[0]] = self.coeffs[0];
        l[2 * beam[0] + 1] = self.coeffs[1];
        l[2 * beam[1]] = self.coeffs[2];
        l[2 * beam[1] + 1] = self.coeffs[3];
        l
    }
}

/// Substitutes `a_j = α_j + δa_j` and keeps terms up to first order in `δa`.
pub fn linearize(config: &BeamConfig, which: Stokes) -> LinearizedStokes {
    let (ah, av) = (config.amp_h, config.amp_v);
    let (s, c) = config.theta.sin_cos();
    match which {
        Stokes::S0 => LinearizedStokes { mean: ah * ah + av * av, coeffs: [ah, 0.0, av, 0.0] },
        Stokes::S1 => LinearizedStokes { mean: ah * ah - av * av, coeffs: [ah, 0.0, -av, 0.0] },
        Stokes::S2 => LinearizedStokes { mean: 2.0 * ah * av * c, coeffs: [av * c, av * s, ah * c, -ah * s] },
        Stokes::S3 => LinearizedStokes { mean: 2.0 * ah * av * s, coeffs: [av * s, -av * c, ah * s, ah * c] },
    }
}

/// Carriers with equal `|<S1>| = |<S2>| = |<S3>| = total_intensity`.
pub fn balanced_config(total_intensity: f64) -> Result<(BeamConfig, BeamConfig)> {
    balanced_config_shifted(total_intensity, 0, 0)
}

/// Same, with the phase lattice `θ_x = π/4 + n_x π/2`, `θ_y = -θ_x + n π`.
pub fn balanced_config_shifted(total_intensity: f64, n_x: i32, n: i32) -> Result<(BeamConfig, BeamConfig)> {
    if !(total_intensity.is_finite() && total_intensity > 0.0) {
        return Err(Error::InvalidParameter(format!("total intensity must be positive, got {total_intensity}")));
    }
    let root3 = 3f64.sqrt();
    let amp_h = ((root3 + 1.0) / 2.0 * total_intensity).sqrt();
    let amp_v = ((root3 - 1.0) / 2.0 * total_intensity).sqrt();
    let theta_x = FRAC_PI_4 + f64::from(n_x) * 2.0 * FRAC_PI_4;
    let theta_y = -theta_x + f64::from(n) * 4.0 * FRAC_PI_4;
    Ok((BeamConfig::new(amp_h, amp_v, theta_x)?, BeamConfig::new(amp_h, amp_v, theta_y)?))
}

/// Gaussian state of two bright beams: TMSV on the H pair and on the V pair,
/// each mode displaced by its beam's carrier.
pub fn bright_gaussian(lambda: f64, x: &BeamConfig, y: &BeamConfig) -> Result<GaussianState> {
    let pair = GaussianState::tmsv(lambda)?;
    GaussianState::product(&[pair.clone(), pair])
        .displace(MODE_HX, C64::new(x.amp_h, 0.0))?
        .displace(MODE_VX, C64::new(x.amp_v, 0.0))?
        .displace(MODE_HY, C64::new(y.amp_h, 0.0))?
        .displace(MODE_VY, C64::new(y.amp_v, 0.0))
}

/// Fock-space counterpart of [`bright_gaussian`] from explicit Schmidt coefficients.
///
/// The H pair carries `sum_n c_n |n, n>` and the V pair the same coefficients,
/// every mode displaced by its carrier and truncated at `cutoff`.
pub fn bright_fock(coeffs: &[C64], x: &BeamConfig, y: &BeamConfig, cutoff: usize) -> Result<FockVector> {
    let dim = cutoff + 1;
    let disp = |amp: f64| -> Vec<Vec<C64>> {
        (0..coeffs.len().min(dim)).map(|n| displaced_number_state(C64::new(amp, 0.0), n, cutoff)).collect()
    };
    let pair = |ax: f64, ay: f64| -> Vec<C64> {
        let (dx, dy) = (disp(ax), disp(ay));
        let mut out = vec![C64::new(0.0, 0.0); dim * dim];
        for (n, c) in coeffs.iter().enumerate().take(dim) {
            for (i, u) in dx[n].iter().enumerate() {
                let cu = c * u;
                for (j, w) in dy[n].iter().enumerate() {
                    out[i * dim + j] += cu * w;
                }
            }
        }
        out
    };
    let h = pair(x.amp_h, y.amp_h);
    let v = pair(x.amp_v, y.amp_v);
    let space = FockSpace::uniform(4, cutoff)?;
    let mut amps = Vec::with_capacity(space.total_dim());
    for a in &h {
        amps.extend(v.iter().map(|b| a * b));
    }
    FockVector::new(space, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn coherent(cfg: &BeamConfig) -> GaussianState {
        GaussianState::vacuum(2)
            .displace(0, C64::new(cfg.amp_h, 0.0))
            .unwrap()
            .displace(1, C64::new(cfg.amp_v, 0.0))
            .unwrap()
    }

    #[test]
    fn quadratic_coefficients() {
        let cfg = BeamConfig::new(1.0, 1.0, 0.0).unwrap();
        let s0 = stokes_quadratic(&cfg, Stokes::S0);
        assert_eq!(s0.coeff(), &DMatrix::identity(2, 2));
        let s1 = stokes_quadratic(&cfg, Stokes::S1);
        assert_eq!(s1.coeff()[(1, 1)], C64::new(-1.0, 0.0));
        let s3 = stokes_quadratic(&cfg, Stokes::S3);
        assert_relative_eq!(s3.coeff()[(0, 1)].im, -1.0);
        assert_relative_eq!(s3.coeff()[(1, 0)].im, 1.0);
        assert_relative_eq!(s3.coeff()[(0, 1)].re, 0.0);
    }

    #[test]
    fn beam_config_validation() {
        assert!(BeamConfig::new(-1.0, 0.0, 0.0).is_err());
        assert!(BeamConfig::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(Stokes::from_index(4).is_err());
    }

    #[test]
    fn linearized_means_match_exact() {
        for &theta in &[0.0, 0.3, FRAC_PI_4, 2.0, -1.1] {
            let cfg = BeamConfig::new(1.7, 0.6, theta).unwrap();
            let state = coherent(&cfg);
            for which in Stokes::ALL {
                let exact = state.quad_mean(&stokes_quadratic(&cfg, which)).unwrap();
                assert_relative_eq!(linearize(&cfg, which).mean, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn linear_coefficients_are_mean_gradients() {
        // d<S>/d<X> at the carrier equals the first-order coefficient.
        let cfg = BeamConfig::new(1.2, 0.8, 0.7).unwrap();
        let h = 1e-6;
        for which in Stokes::ALL {
            let obs = stokes_quadratic(&cfg, which);
            let lin = linearize(&cfg, which);
            for q in 0..4 {
                let mode = q / 2;
                let shift = |sgn: f64| {
                    let amp = if q % 2 == 0 { C64::new(sgn * h / 2.0, 0.0) } else { C64::new(0.0, sgn * h / 2.0) };
                    coherent(&cfg).displace(mode, amp).unwrap().quad_mean(&obs).unwrap()
                };
                let grad = (shift(1.0) - shift(-1.0)) / (2.0 * h);
                assert!((grad - lin.coeffs[q]).abs() < 1e-6, "{which:?} q={q}: {grad} vs {}", lin.coeffs[q]);
            }
        }
    }

    #[test]
    fn s3_mean_at_quarter_turn() {
        let cfg = BeamConfig::new(1.5, 0.5, FRAC_PI_2).unwrap();
        assert_relative_eq!(linearize(&cfg, Stokes::S3).mean, 2.0 * 1.5 * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn balanced_amplitudes() {
        let (x, y) = balanced_config(1.0).unwrap();
        assert_relative_eq!(x.amp_h * x.amp_h, 1.3660254, epsilon = 1e-7);
        assert_relative_eq!(x.amp_v * x.amp_v, 0.3660254, epsilon = 1e-7);
        assert_relative_eq!(y.theta, -x.theta);
        for cfg in [x, y] {
            for which in Stokes::POLARIZATION {
                assert_relative_eq!(linearize(&cfg, which).mean.abs(), 1.0, epsilon = 1e-12);
            }
        }
        assert!(balanced_config(0.0).is_err());
    }

    #[test]
    fn balanced_scaling() {
        let (x1, _) = balanced_config(1.0).unwrap();
        let (x4, y4) = balanced_config(4.0).unwrap();
        assert_eq!(x1.theta, x4.theta);
        assert_relative_eq!(x4.amp_h, 2.0 * x1.amp_h, epsilon = 1e-14);
        assert_relative_eq!(y4.amp_v, 2.0 * x1.amp_v, epsilon = 1e-14);
    }

    #[test]
    fn balanced_commutator_means() {
        let alpha2 = 2.5;
        let (x, _) = balanced_config(alpha2).unwrap();
        let state = coherent(&x);
        for (i, a) in Stokes::POLARIZATION.iter().enumerate() {
            for b in &Stokes::POLARIZATION[i + 1..] {
                let m = state.quad_cov(&stokes_quadratic(&x, *a), &stokes_quadratic(&x, *b)).unwrap();
                assert_relative_eq!(m.commutator.abs(), 2.0 * alpha2, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fock_stokes_hermitian() {
        let space = FockSpace::uniform(2, 4).unwrap();
        let cfg = BeamConfig::new(1.0, 1.0, 0.37).unwrap();
        for which in Stokes::ALL {
            let op = build_stokes(&space, &cfg, which, [0, 1]).unwrap();
            assert!(op.hermitian_deviation() < 1e-12);
        }
    }

    #[test]
    fn bright_fock_normalized_and_matches_gaussian_mean() {
        let x = BeamConfig::new(0.8, 0.5, FRAC_PI_4).unwrap();
        let y = BeamConfig::new(0.8, 0.5, -FRAC_PI_4).unwrap();
        let lam: f64 = 0.3;
        let cutoff = 14;
        let coeffs: Vec<C64> =
            (0..=cutoff).map(|n| C64::new(lam.powi(n as i32) * (1.0 - lam * lam).sqrt(), 0.0)).collect();
        let psi = bright_fock(&coeffs, &x, &y, cutoff).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-9);
        let g = bright_gaussian(lam, &x, &y).unwrap();
        let op = build_stokes(psi.space(), &x, Stokes::S2, BEAM_X).unwrap();
        let fock_mean = crate::fock::expectation_real(&psi, &op).unwrap();
        let gauss_mean = g.quad_mean(&beam_stokes(&x, Stokes::S2, BEAM_X)).unwrap();
        assert!((fock_mean - gauss_mean).abs() < 1e-7, "{fock_mean} vs {gauss_mean}");
    }
}
