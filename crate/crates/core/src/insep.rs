//! Variance-based inseparability criterion and the closed-form degrees.
//!
//! For observables `U = r_x A_x + r_y A_y`, `V = s_x B_x + s_y B_y` with
//! `C = i[A, B]`, a state is inseparable if
//! `Var U + Var V < |r_x s_x| |<C_x>| + |r_y s_y| |<C_y>|`. With unit weights
//! this normalizes to the degree
//! `I = (Δ²_{x±y} A + Δ²_{x±y} B) / (2 |<[δA, δB]>|)`, where `I < 1` certifies
//! entanglement and `I >= 1` is inconclusive.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::Sign;

type C64 = Complex64;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const NORMALIZATION_TOL: f64 = 1e-10;

/// Default tail tolerance for truncating geometric Schmidt series.
pub const DEFAULT_TAIL_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionInput {
    pub r_x: f64,
    pub r_y: f64,
    pub s_x: f64,
    pub s_y: f64,
    pub var_u: f64,
    pub var_v: f64,
    pub comm_x: f64,
    pub comm_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionOutcome {
    /// `false` means undecided, never "separable".
    pub inseparable: bool,
    /// Bound minus variance sum.
    pub margin: f64,
}

pub fn criterion_general(input: &CriterionInput) -> CriterionOutcome {
    let bound = (input.r_x * input.s_x).abs() * input.comm_x.abs() + (input.r_y * input.s_y).abs() * input.comm_y.abs();
    let margin = bound - (input.var_u + input.var_v);
    CriterionOutcome { inseparable: margin > 0.0, margin }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Inseparable,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsepReport {
    pub degree: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub sign_a: Sign,
    pub sign_b: Sign,
    pub comm_abs: f64,
    pub verdict: Verdict,
}

impl InsepReport {
    pub fn new(var_a: f64, sign_a: Sign, var_b: f64, sign_b: Sign, comm_abs: f64) -> Result<Self> {
        if !(comm_abs > 0.0) {
            return Err(Error::DegenerateDenominator { comm_abs });
        }
        let degree = (var_a + var_b) / (2.0 * comm_abs);
        let verdict = if degree < 1.0 { Verdict::Inseparable } else { Verdict::Undecided };
        Ok(Self { degree, var_a, var_b, sign_a, sign_b, comm_abs, verdict })
    }
}

/// Degree of inseparability from minimized variances; signs default to difference.
pub fn degree(var_a: f64, var_b: f64, comm_abs: f64) -> Result<InsepReport> {
    InsepReport::new(var_a, Sign::Minus, var_b, Sign::Minus, comm_abs)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    Ok(())
}

/// `√3 (1 - λ)/(1 + λ)` for the bright two-pair squeezed vacuum.
pub fn i_lambda(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(SQRT3 * (1.0 - lambda) / (1.0 + lambda))
}

/// Squeezing at which `i_lambda` crosses 1.
pub fn threshold_lambda() -> f64 {
    2.0 - SQRT3
}

/// Schmidt coefficients `{c_n}` of a pair state `sum_n c_n |n, n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtState {
    coeffs: Vec<C64>,
}

/// Smallest `N` with `λ^{2N} (1 - λ²) < eps`.
pub fn tail_cutoff(lambda: f64, eps: f64) -> Result<usize> {
    check_lambda(lambda)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("tail tolerance must be positive, got {eps}")));
    }
    let x = lambda * lambda;
    let mut term = 1.0 - x;
    let mut n = 0;
    while term >= eps {
        term *= x;
        n += 1;
    }
    Ok(n)
}

impl SchmidtState {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        let state = Self { coeffs };
        let norm_sq = state.norm_sqr();
        if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(state)
    }

    /// Normalizes arbitrary nonzero coefficients.
    pub fn normalized(mut coeffs: Vec<C64>) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        coeffs.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { coeffs })
    }

    /// `c_n = λ^n √(1 - λ²)` for `n = 0..=tail_cutoff(λ, eps)`.
    pub fn tmsv(lambda: f64, eps: f64) -> Result<Self> {
        let n_cut = tail_cutoff(lambda, eps)?;
        let norm = (1.0 - lambda * lambda).sqrt();
        let mut coeffs = Vec::with_capacity(n_cut + 1);
        let mut pow = 1.0;
        for _ in 0..=n_cut {
            coeffs.push(C64::new(pow * norm, 0.0));
            pow *= lambda;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `<n> = sum_n n |c_n|²`.
    pub fn mean_photons(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// `<a_x a_y> = sum_n (n + 1) conj(c_n) c_{n+1}`.
    pub fn pair_coherence(&self) -> C64 {
        self.coeffs.windows(2).enumerate().map(|(n, w)| w[0].conj() * w[1] * (n + 1) as f64).sum()
    }
}

/// Degree of inseparability of two bright beams whose H and V pairs both
/// carry the Schmidt state `state`, in the linearized regime:
/// `√3 [ (1 + 2<n>) - 2 |Re <a_x a_y>| ]`.
///
/// The `Re` and absolute value pick the better of the sum and difference
/// quadrature combinations, which keeps the result correct for complex
/// coefficients.
pub fn i_schmidt(state: &SchmidtState) -> Result<f64> {
    let norm_sq = state.norm_sqr();
    if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    let diag: f64 = state.coeffs.iter().enumerate().map(|(n, c)| (2 * n + 1) as f64 * c.norm_sqr()).sum();
    Ok(SQRT3 * (diag - 2.0 * state.pair_coherence().re.abs()))
}

/// The double sum `√3 sum_{n,m} [(2n+1)|d_n|²|d_m|² - 2(n+1)|d_m|² d_{n+1} d_n]`
/// evaluated literally, with no conjugation; complex for complex coefficients.
pub fn i_schmidt_literal(state: &SchmidtState) -> C64 {
    let total: f64 = state.norm_sqr();
    let diag: f64 = state.coeffs.iter().enumerate().map(|(n, c)| (2 * n + 1) as f64 * c.norm_sqr()).sum();
    let off: C64 = state.coeffs.windows(2).enumerate().map(|(n, w)| w[1] * w[0] * (n + 1) as f64).sum();
    (C64::new(diag, 0.0) - off * 2.0) * total * SQRT3
}

/// The literature closed form for the photon-number-projected state,
/// `√3/(J+1) [ sum_{m=0}^{J} (2m+1) - sum_{m=0}^{J-1} √((J-1)(m+1)) ]`,
/// evaluated verbatim.
pub fn i_j_printed(j: u32) -> f64 {
    let jf = f64::from(j);
    let first: f64 = (0..=j).map(|m| f64::from(2 * m + 1)).sum();
    let second: f64 = (0..j).map(|m| ((jf - 1.0) * f64::from(m + 1)).sqrt()).sum();
    SQRT3 / (jf + 1.0) * (first - second)
}
