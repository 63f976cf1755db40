//! Exact moments of quadratic observables on multi-mode Gaussian states.
//!
//! Quadrature convention, shared by the whole crate:
//! `X+ = a + a^dagger`, `X- = -i (a - a^dagger)`, so `[X+, X-] = 2i` and the
//! vacuum covariance is the identity. Quadratures are ordered
//! `(X+_1, X-_1, ..., X+_M, X-_M)`.
//!
//! Every observable is reduced to an ordered polynomial
//! `sum_pq K_pq R_p R_q + sum_p l_p R_p + c` in the quadratures `R`. Means and
//! second moments then follow from the two-point function
//! `W_pq = <dR_p dR_q> = V_pq + i Omega_pq` and Wick factorization of the
//! centered fourth moments.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

const SYMMETRY_TOL: f64 = 1e-12;
const PHYSICALITY_TOL: f64 = 1e-10;

/// Hermitian quadratic form `sum_jk H_jk a_j^dagger a_k + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObservable {
    coeff: DMatrix<C64>,
    constant: f64,
}

impl QuadraticObservable {
    pub fn new(coeff: DMatrix<C64>, constant: f64) -> Result<Self> {
        if !coeff.is_square() {
            return Err(Error::DimensionMismatch { expected: coeff.nrows(), found: coeff.ncols() });
        }
        let deviation = (&coeff - coeff.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if deviation > SYMMETRY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { coeff, constant })
    }

    pub fn n_modes(&self) -> usize {
        self.coeff.nrows()
    }

    pub fn coeff(&self) -> &DMatrix<C64> {
        &self.coeff
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Re-expresses the observable on `n_modes` modes, local mode `k` mapped to `modes[k]`.
    pub fn embed(&self, n_modes: usize, modes: &[usize]) -> Result<Self> {
        if modes.len() != self.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.n_modes(), found: modes.len() });
        }
        if let Some(&bad) = modes.iter().find(|&&m| m >= n_modes) {
            return Err(Error::ModeOutOfRange { index: bad, n_modes });
        }
        let mut coeff = DMatrix::zeros(n_modes, n_modes);
        for (j, &mj) in modes.iter().enumerate() {
            for (k, &mk) in modes.iter().enumerate() {
                coeff[(mj, mk)] += self.coeff[(j, k)];
            }
        }
        Ok(Self { coeff, constant: self.constant })
    }

    /// `self + sign * other`.
    pub fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        if self.n_modes() != other.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.n_modes(), found: other.n_modes() });
        }
        Ok(Self { coeff: &self.coeff + other.coeff.map(|z| z * sign), constant: self.constant + sign * other.constant })
    }

    /// Ordered quadrature polynomial `(K, l, c)`; `l` is zero for these forms.
    fn quadrature_form(&self) -> QuadraturePolynomial {
        let m = self.n_modes();
        // a_j = (X+_j + i X-_j) / 2
        let mut u = DMatrix::<C64>::zeros(m, 2 * m);
        for j in 0..m {
            u[(j, 2 * j)] = C64::new(0.5, 0.0);
            u[(j, 2 * j + 1)] = C64::new(0.0, 0.5);
        }
        QuadraturePolynomial {
            quad: u.adjoint() * &self.coeff * u,
            linear: DVector::zeros(2 * m),
            constant: C64::new(self.constant, 0.0),
        }
    }
}

struct QuadraturePolynomial {
    quad: DMatrix<C64>,
    linear: DVector<C64>,
    constant: C64,
}

/// Symmetrized covariance `1/2 <{dA, dB}>` and commutator mean `<[A, B]> / i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadMoments {
    pub covariance: f64,
    pub commutator: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

impl GaussianState {
    /// Validates symmetry and the uncertainty relation `V + i Omega >= 0`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if !dim.is_multiple_of(2) || cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: cov.nrows() });
        }
        let asym = (&cov - cov.transpose()).iter().map(|x| x.abs()).fold(0.0, f64::max);
        if asym > SYMMETRY_TOL {
            return Err(Error::InvalidParameter(format!("covariance not symmetric ({asym:e})")));
        }
        let state = Self { mean, cov };
        let min_eig = state.min_uncertainty_eigenvalue();
        if min_eig < -PHYSICALITY_TOL {
            return Err(Error::InvalidParameter(format!("covariance violates uncertainty ({min_eig:e})")));
        }
        Ok(state)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self { mean: DVector::zeros(2 * n_modes), cov: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    /// Two-mode squeezed vacuum with `lambda = tanh r`.
    pub fn tmsv(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::LambdaOutOfRange(lambda));
        }
        let r = lambda.atanh();
        let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let mut cov = DMatrix::identity(4, 4) * ch;
        cov[(0, 2)] = sh;
        cov[(2, 0)] = sh;
        cov[(1, 3)] = -sh;
        cov[(3, 1)] = -sh;
        Ok(Self { mean: DVector::zeros(4), cov })
    }

    /// Tensor product; modes of `parts[0]` come first.
    pub fn product(parts: &[GaussianState]) -> Self {
        let dim: usize = parts.iter().map(|p| p.mean.len()).sum();
        let mut mean = DVector::zeros(dim);
        let mut cov = DMatrix::zeros(dim, dim);
        let mut off = 0;
        for p in parts {
            let d = p.mean.len();
            mean.rows_mut(off, d).copy_from(&p.mean);
            cov.view_mut((off, off), (d, d)).copy_from(&p.cov);
            off += d;
        }
        Self { mean, cov }
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Applies `D(amplitude)` to `mode`: the mean moves by `(2 Re, 2 Im)`.
    pub fn displace(&self, mode: usize, amplitude: C64) -> Result<Self> {
        if mode >= self.n_modes() {
            return Err(Error::ModeOutOfRange { index: mode, n_modes: self.n_modes() });
        }
        let mut out = self.clone();
        out.mean[2 * mode] += 2.0 * amplitude.re;
        out.mean[2 * mode + 1] += 2.0 * amplitude.im;
        Ok(out)
    }

    /// Smallest eigenvalue of the Hermitian matrix `V + i Omega`.
    pub fn min_uncertainty_eigenvalue(&self) -> f64 {
        let n = self.cov.nrows();
        let omega = symplectic_form(n / 2);
        // Real representation [[A, -B], [B, A]] of A + iB has the same spectrum, doubled.
        let mut real = DMatrix::zeros(2 * n, 2 * n);
        real.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        real.view_mut((n, n), (n, n)).copy_from(&self.cov);
        real.view_mut((0, n), (n, n)).copy_from(&(-&omega));
        real.view_mut((n, 0), (n, n)).copy_from(&omega);
        SymmetricEigen::new(real).eigenvalues.min()
    }

    fn two_point(&self) -> DMatrix<C64> {
        let omega = symplectic_form(self.n_modes());
        DMatrix::from_fn(self.cov.nrows(), self.cov.ncols(), |p, q| C64::new(self.cov[(p, q)], omega[(p, q)]))
    }

    fn check_modes(&self, obs: &QuadraticObservable) -> Result<()> {
        if obs.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.n_modes(), found: obs.n_modes() });
        }
        Ok(())
    }

    fn complex_mean(&self) -> DVector<C64> {
        self.mean.map(|x| C64::new(x, 0.0))
    }

    fn poly_mean(&self, poly: &QuadraturePolynomial, w: &DMatrix<C64>) -> C64 {
        let mu = self.complex_mean();
        let wick: C64 = poly.quad.component_mul(w).sum();
        (mu.transpose() * &poly.quad * &mu)[(0, 0)] + (poly.linear.transpose() * &mu)[(0, 0)] + poly.constant + wick
    }

    /// `<dA dB>` for two ordered quadrature polynomials.
    fn poly_product(&self, a: &QuadraturePolynomial, b: &QuadraturePolynomial, w: &DMatrix<C64>) -> C64 {
        let mu = self.complex_mean();
        let la = (&a.quad + a.quad.transpose()) * &mu + &a.linear;
        let lb = (&b.quad + b.quad.transpose()) * &mu + &b.linear;
        let linear = (la.transpose() * w * lb)[(0, 0)];
        let wt = w.transpose();
        let ka_t = a.quad.transpose();
        let direct = (&ka_t * w * &b.quad * &wt).trace();
        let crossed = (&ka_t * w * b.quad.transpose() * &wt).trace();
        linear + direct + crossed
    }

    /// Exact mean of a quadratic observable, including the vacuum-ordering term.
    pub fn quad_mean(&self, obs: &QuadraticObservable) -> Result<f64> {
        self.check_modes(obs)?;
        let w = self.two_point();
        Ok(self.poly_mean(&obs.quadrature_form(), &w).re)
    }

    pub fn quad_cov(&self, a: &QuadraticObservable, b: &QuadraticObservable) -> Result<QuadMoments> {
        self.check_modes(a)?;
        self.check_modes(b)?;
        let w = self.two_point();
        let z = self.poly_product(&a.quadrature_form(), &b.quadrature_form(), &w);
        Ok(QuadMoments { covariance: z.re, commutator: 2.0 * z.im })
    }

    pub fn quad_variance(&self, obs: &QuadraticObservable) -> Result<f64> {
        Ok(self.quad_cov(obs, obs)?.covariance)
    }

    /// Variance of the linear fluctuation `sum_p l_p dR_p` with real coefficients.
    pub fn linear_variance(&self, coeffs: &[f64]) -> Result<f64> {
        if coeffs.len() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), found: coeffs.len() });
        }
        let l = DVector::from_column_slice(coeffs);
        Ok((l.transpose() * &self.cov * &l)[(0, 0)])
    }

    /// `min_s Var(A + s B)` over `s = ±1` with the achieving sign; ties give `-1`.
    pub fn variance_min_pm(&self, a: &QuadraticObservable, b: &QuadraticObservable) -> Result<(f64, f64)> {
        let plus = self.quad_variance(&a.combine(b, 1.0)?)?;
        let minus = self.quad_variance(&a.combine(b, -1.0)?)?;
        Ok(if plus < minus { (plus, 1.0) } else { (minus, -1.0) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn number(n_modes: usize, mode: usize) -> QuadraticObservable {
        let mut h = DMatrix::zeros(n_modes, n_modes);
        h[(mode, mode)] = C64::new(1.0, 0.0);
        QuadraticObservable::new(h, 0.0).unwrap()
    }

    #[test]
    fn vacuum_tmsv_and_physicality() {
        let s = GaussianState::tmsv(0.0).unwrap();
        assert_eq!(s.cov(), &DMatrix::identity(4, 4));
        let s = GaussianState::tmsv(0.9).unwrap();
        assert!(s.min_uncertainty_eigenvalue() > -1e-10);
        assert!(GaussianState::tmsv(1.0).is_err());
        assert!(GaussianState::tmsv(-0.1).is_err());
    }

    #[test]
    fn unphysical_covariance_rejected() {
        let cov = DMatrix::identity(2, 2) * 0.5;
        assert!(GaussianState::new(DVector::zeros(2), cov).is_err());
    }

    #[test]
    fn tmsv_epr_variance() {
        // Var(X+_x - X+_y) = 2(1 - lambda)/(1 + lambda)
        for &lam in &[0.5, 0.9, 0.999] {
            let s = GaussianState::tmsv(lam).unwrap();
            let mut l = [0.0; 4];
            l[0] = 1.0;
            l[2] = -1.0;
            let v = s.linear_variance(&l).unwrap();
            assert_relative_eq!(v, 2.0 * (1.0 - lam) / (1.0 + lam), epsilon = 1e-9);
        }
    }

    #[test]
    fn tmsv_photon_number_from_schmidt_sum() {
        let lam: f64 = 0.5;
        let s = GaussianState::tmsv(lam).unwrap();
        let n = s.quad_mean(&number(2, 0)).unwrap();
        assert_relative_eq!(n, lam * lam / (1.0 - lam * lam), epsilon = 1e-12);
    }

    #[test]
    fn displacement_shifts_mean_only() {
        let vac = GaussianState::vacuum(2);
        assert_eq!(vac.displace(0, C64::new(0.0, 0.0)).unwrap(), vac);
        let d = vac.displace(0, C64::new(1.5, 0.0)).unwrap();
        assert_eq!(d.mean()[0], 3.0);
        assert_eq!(d.mean()[1], 0.0);
        let dd = d.displace(0, C64::new(-0.5, 0.25)).unwrap();
        assert_relative_eq!(dd.mean()[0], 2.0);
        assert_relative_eq!(dd.mean()[1], 0.5);
        assert_eq!(dd.cov(), vac.cov());
        assert!(vac.displace(2, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn coherent_number_is_poisson() {
        let alpha = C64::new(1.3, -0.4);
        let s = GaussianState::vacuum(1).displace(0, alpha).unwrap();
        let n = number(1, 0);
        assert_relative_eq!(s.quad_mean(&n).unwrap(), alpha.norm_sqr(), epsilon = 1e-12);
        assert_relative_eq!(s.quad_variance(&n).unwrap(), alpha.norm_sqr(), epsilon = 1e-12);
    }

    #[test]
    fn thermal_number_variance() {
        // Reduced TMSV mode is thermal: Var(n) = nbar (nbar + 1).
        let lam: f64 = 0.6;
        let nbar = lam * lam / (1.0 - lam * lam);
        let s = GaussianState::tmsv(lam).unwrap();
        assert_relative_eq!(s.quad_variance(&number(2, 0)).unwrap(), nbar * (nbar + 1.0), epsilon = 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = DMatrix::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(QuadraticObservable::new(h, 0.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn embed_places_modes() {
        let n = number(1, 0).embed(3, &[2]).unwrap();
        assert_eq!(n.coeff()[(2, 2)], C64::new(1.0, 0.0));
        assert!(number(1, 0).embed(3, &[3]).is_err());
    }
}
