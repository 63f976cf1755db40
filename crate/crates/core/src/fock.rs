//! Truncated multi-mode Fock space.
//!
//! Basis kets are indexed by the occupation multi-index `(n_1, ..., n_M)` in
//! row-major order: mode 0 varies slowest. States are dense, operators are
//! stored in CSR form since every operator built here has `O(dim)` nonzeros.
//!
//! Operators live on the full truncated space. Physics checks must restrict
//! to states whose support stays at least two photons below every cutoff,
//! otherwise `[a, a^dagger]` picks up the truncation-boundary row.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const HERMITIAN_MEAN_TOL: f64 = 1e-10;

/// Sign choice for a sum (`Plus`) or difference (`Minus`) of two observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Product space of bosonic modes, each truncated at `n <= cutoff`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl FockSpace {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidParameter("Fock space needs at least one mode".into()));
        }
        let mut strides = vec![1; cutoffs.len()];
        for k in (0..cutoffs.len() - 1).rev() {
            strides[k] = strides[k + 1] * (cutoffs[k + 1] + 1);
        }
        let total_dim = strides[0] * (cutoffs[0] + 1);
        Ok(Self { cutoffs, strides, total_dim })
    }

    pub fn uniform(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; n_modes])
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn mode_dim(&self, mode: usize) -> usize {
        self.cutoffs[mode] + 1
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Flat index of an occupation pattern.
    pub fn index(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.n_modes(), found: occupation.len() });
        }
        let mut idx = 0;
        for (k, &n) in occupation.iter().enumerate() {
            if n > self.cutoffs[k] {
                return Err(Error::InvalidParameter(format!(
                    "occupation {n} exceeds cutoff {} of mode {k}",
                    self.cutoffs[k]
                )));
            }
            idx += n * self.strides[k];
        }
        Ok(idx)
    }

    /// Occupation of a single mode at a flat index.
    pub fn occupation_of(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % (self.cutoffs[mode] + 1)
    }

    pub fn occupation(&self, index: usize) -> Vec<usize> {
        (0..self.n_modes()).map(|k| self.occupation_of(index, k)).collect()
    }
}

/// Dense state vector over a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    space: FockSpace,
    amps: Vec<C64>,
}

impl FockVector {
    pub fn new(space: FockSpace, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), found: amps.len() });
        }
        Ok(Self { space, amps })
    }

    pub fn zeros(space: FockSpace) -> Self {
        let amps = vec![C64::new(0.0, 0.0); space.total_dim()];
        Self { space, amps }
    }

    /// Number state `|n_1, ..., n_M>`.
    pub fn basis(space: FockSpace, occupation: &[usize]) -> Result<Self> {
        let idx = space.index(occupation)?;
        let mut v = Self::zeros(space);
        v.amps[idx] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Tensor product of one single-mode vector per mode.
    pub fn product(space: FockSpace, factors: &[&[C64]]) -> Result<Self> {
        let mut v = Self::zeros(space);
        v.add_product(C64::new(1.0, 0.0), factors)?;
        Ok(v)
    }

    /// Adds `weight * (f_1 ⊗ ... ⊗ f_M)` in place.
    pub fn add_product(&mut self, weight: C64, factors: &[&[C64]]) -> Result<()> {
        if factors.len() != self.space.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.space.n_modes(), found: factors.len() });
        }
        for (k, f) in factors.iter().enumerate() {
            if f.len() != self.space.mode_dim(k) {
                return Err(Error::DimensionMismatch { expected: self.space.mode_dim(k), found: f.len() });
            }
        }
        // Row-major kron: build the product progressively from the slowest mode.
        let mut acc = vec![weight];
        for f in factors {
            let mut next = Vec::with_capacity(acc.len() * f.len());
            for a in &acc {
                next.extend(f.iter().map(|x| a * x));
            }
            acc = next;
        }
        for (dst, src) in self.amps.iter_mut().zip(acc) {
            *dst += src;
        }
        Ok(())
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, occupation: &[usize]) -> Result<C64> {
        Ok(self.amps[self.space.index(occupation)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch { expected: self.space.total_dim(), found: other.space.total_dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Largest occupation of each mode carrying an amplitude above `tol`.
    pub fn max_occupation(&self, tol: f64) -> Vec<usize> {
        let mut out = vec![0; self.space.n_modes()];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > tol {
                for (k, m) in out.iter_mut().enumerate() {
                    *m = (*m).max(self.space.occupation_of(i, k));
                }
            }
        }
        out
    }
}

/// Sparse operator over a [`FockSpace`], CSR storage.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl FockOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(space: FockSpace, mut triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        let dim = space.total_dim();
        for &(r, c, _) in &triplets {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.max(c) + 1 });
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self { space, indptr, indices, values })
    }

    pub fn identity(space: FockSpace) -> Self {
        let dim = space.total_dim();
        Self { space, indptr: (0..=dim).collect(), indices: (0..dim).collect(), values: vec![C64::new(1.0, 0.0); dim] }
    }

    /// Single-mode lowering operator on photon numbers `0..=cutoff`.
    pub fn ladder(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::DegenerateSpace);
        }
        let space = FockSpace::new(vec![cutoff])?;
        let triplets = (1..=cutoff).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))).collect();
        Self::from_triplets(space, triplets)
    }

    /// Places a single-mode operator on `mode`, identity elsewhere.
    pub fn embed(&self, mode: usize, space: &FockSpace) -> Result<Self> {
        if self.space.n_modes() != 1 {
            return Err(Error::InvalidParameter("embed expects a single-mode operator".into()));
        }
        if mode >= space.n_modes() {
            return Err(Error::ModeOutOfRange { index: mode, n_modes: space.n_modes() });
        }
        if self.space.total_dim() != space.mode_dim(mode) {
            return Err(Error::DimensionMismatch { expected: space.mode_dim(mode), found: self.space.total_dim() });
        }
        let stride = space.strides[mode];
        let dim = space.total_dim();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in 0..dim {
            let local = space.occupation_of(row, mode);
            for p in self.indptr[local]..self.indptr[local + 1] {
                let c = self.indices[p];
                indices.push(row + c * stride - local * stride);
                values.push(self.values[p]);
            }
            indptr.push(indices.len());
        }
        Ok(Self { space: space.clone(), indptr, indices, values })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        (self.indptr[row]..self.indptr[row + 1])
            .find(|&p| self.indices[p] == col)
            .map_or(C64::new(0.0, 0.0), |p| self.values[p])
    }

    fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.space.total_dim())
            .flat_map(move |r| (self.indptr[r]..self.indptr[r + 1]).map(move |p| (r, self.indices[p], self.values[p])))
    }

    pub fn adjoint(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.space.clone(), t).expect("same space")
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    fn check_space(&self, other: &FockOperator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch { expected: self.space.total_dim(), found: other.space.total_dim() });
        }
        Ok(())
    }

    pub fn add(&self, other: &FockOperator) -> Result<Self> {
        self.check_space(other)?;
        let t = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.space.clone(), t)
    }

    pub fn sub(&self, other: &FockOperator) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &FockOperator) -> Result<Self> {
        self.check_space(other)?;
        let dim = self.space.total_dim();
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let mut marker = vec![usize::MAX; dim];
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let mut row_cols = Vec::new();
        for r in 0..dim {
            row_cols.clear();
            for p in self.indptr[r]..self.indptr[r + 1] {
                let (k, a) = (self.indices[p], self.values[p]);
                for q in other.indptr[k]..other.indptr[k + 1] {
                    let c = other.indices[q];
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        row_cols.push(c);
                    }
                    acc[c] += a * other.values[q];
                }
            }
            row_cols.sort_unstable();
            for &c in &row_cols {
                if acc[c] != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { space: self.space.clone(), indptr, indices, values })
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &FockOperator) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Matrix-vector product on raw amplitudes.
    pub fn apply_slice(&self, v: &[C64]) -> Vec<C64> {
        (0..self.space.total_dim())
            .map(|r| (self.indptr[r]..self.indptr[r + 1]).map(|p| self.values[p] * v[self.indices[p]]).sum())
            .collect()
    }

    pub fn apply(&self, state: &FockVector) -> Result<FockVector> {
        if self.space != state.space {
            return Err(Error::DimensionMismatch { expected: self.space.total_dim(), found: state.space.total_dim() });
        }
        Ok(FockVector { space: self.space.clone(), amps: self.apply_slice(&state.amps) })
    }

    /// Largest entrywise deviation `|A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let diff = self.sub(&self.adjoint()).expect("same space");
        diff.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `<state|op|state>`.
pub fn expectation(state: &FockVector, op: &FockOperator) -> Result<C64> {
    let applied = op.apply(state)?;
    state.inner(&applied)
}

/// Real mean of a Hermitian observable; rejects an imaginary part above 1e-10.
pub fn expectation_real(state: &FockVector, op: &FockOperator) -> Result<f64> {
    let z = expectation(state, op)?;
    if z.im.abs() > HERMITIAN_MEAN_TOL {
        return Err(Error::NotHermitian { deviation: z.im.abs() });
    }
    Ok(z.re)
}

/// `min_s <(dO_x + s dO_y)^2>` over `s = ±1`, with the achieving sign.
///
/// Ties resolve to `Sign::Minus`.
pub fn variance_min_pm(state: &FockVector, op_x: &FockOperator, op_y: &FockOperator) -> Result<(f64, Sign)> {
    let mean_x = expectation_real(state, op_x)?;
    let mean_y = expectation_real(state, op_y)?;
    let psi = state.amplitudes();
    let dx: Vec<C64> = op_x.apply(state)?.amps.iter().zip(psi).map(|(a, p)| a - p * mean_x).collect();
    let dy: Vec<C64> = op_y.apply(state)?.amps.iter().zip(psi).map(|(a, p)| a - p * mean_y).collect();
    // <(dX + s dY)^2> = |dX psi|^2 + |dY psi|^2 + 2 s Re<dX psi|dY psi>.
    let nx: f64 = dx.iter().map(|a| a.norm_sqr()).sum();
    let ny: f64 = dy.iter().map(|a| a.norm_sqr()).sum();
    let cross: f64 = dx.iter().zip(&dy).map(|(a, b)| (a.conj() * b).re).sum();
    let plus = nx + ny + 2.0 * cross;
    let minus = nx + ny - 2.0 * cross;
    Ok(if plus < minus { (plus, Sign::Plus) } else { (minus, Sign::Minus) })
}

/// Truncated amplitudes of the displaced number state `D(alpha)|n>`.
///
/// Uses `D(alpha)|n> = (a^dagger - conj(alpha))^n |alpha> / sqrt(n!)`. Raising
/// never reads components above the one it writes, so every amplitude up to
/// `cutoff` is exact; only the mass beyond the cutoff is missing.
pub fn displaced_number_state(alpha: C64, n: usize, cutoff: usize) -> Vec<C64> {
    let dim = cutoff + 1;
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 1..dim {
        v[k] = v[k - 1] * alpha / (k as f64).sqrt();
    }
    for step in 1..=n {
        let mut next = vec![C64::new(0.0, 0.0); dim];
        for m in 0..dim {
            let raised = if m > 0 { v[m - 1] * (m as f64).sqrt() } else { C64::new(0.0, 0.0) };
            next[m] = (raised - alpha.conj() * v[m]) / (step as f64).sqrt();
        }
        v = next;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ladder_entries() {
        let a = FockOperator::ladder(1).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), c(1.0));
        let a3 = FockOperator::ladder(3).unwrap();
        assert_relative_eq!(a3.get(2, 3).re, 1.7320508, epsilon = 1e-7);
        assert_eq!(FockOperator::ladder(0), Err(Error::DegenerateSpace));
    }

    #[test]
    fn number_operator_diagonal() {
        let a = FockOperator::ladder(10).unwrap();
        let n = a.adjoint().mul(&a).unwrap();
        for k in 0..=10 {
            assert_relative_eq!(n.get(k, k).re, k as f64, epsilon = 1e-12);
        }
        assert_eq!(n.nnz(), 10);
    }

    #[test]
    fn row_major_ordering() {
        let s = FockSpace::new(vec![1, 2]).unwrap();
        assert_eq!(s.total_dim(), 6);
        assert_eq!(s.index(&[1, 0]).unwrap(), 3);
        assert_eq!(s.index(&[0, 2]).unwrap(), 2);
        assert_eq!(s.occupation(5), vec![1, 2]);
    }

    #[test]
    fn embed_lowers_first_mode() {
        let space = FockSpace::uniform(2, 2).unwrap();
        let a0 = FockOperator::ladder(2).unwrap().embed(0, &space).unwrap();
        let out = a0.apply(&FockVector::basis(space.clone(), &[1, 1]).unwrap()).unwrap();
        assert_eq!(out, FockVector::basis(space, &[0, 1]).unwrap());
    }

    #[test]
    fn embed_identity_is_identity() {
        let space = FockSpace::new(vec![2, 3, 1]).unwrap();
        for k in 0..3 {
            let id = FockOperator::identity(FockSpace::new(vec![space.cutoffs()[k]]).unwrap());
            assert_eq!(id.embed(k, &space).unwrap(), FockOperator::identity(space.clone()));
        }
    }

    #[test]
    fn embed_errors() {
        let space = FockSpace::uniform(2, 2).unwrap();
        let a = FockOperator::ladder(2).unwrap();
        assert!(matches!(a.embed(2, &space), Err(Error::ModeOutOfRange { .. })));
        let wrong = FockOperator::ladder(3).unwrap();
        assert!(matches!(wrong.embed(0, &space), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hopping_moves_photon() {
        let space = FockSpace::uniform(2, 2).unwrap();
        let a = FockOperator::ladder(2).unwrap();
        let a0 = a.embed(0, &space).unwrap();
        let ad1 = a.adjoint().embed(1, &space).unwrap();
        let hop = a0.mul(&ad1).unwrap();
        let out = hop.apply(&FockVector::basis(space.clone(), &[1, 0]).unwrap()).unwrap();
        assert_eq!(out, FockVector::basis(space, &[0, 1]).unwrap());
    }

    #[test]
    fn commutator_is_identity_below_boundary() {
        let cutoff = 6;
        let a = FockOperator::ladder(cutoff).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap();
        for k in 0..cutoff {
            assert_relative_eq!(comm.get(k, k).re, 1.0, epsilon = 1e-12);
        }
        // Truncation-boundary row is exempt.
        assert_relative_eq!(comm.get(cutoff, cutoff).re, -(cutoff as f64), epsilon = 1e-12);
    }

    #[test]
    fn expectation_values() {
        let a = FockOperator::ladder(4).unwrap();
        let n = a.adjoint().mul(&a).unwrap();
        let space = n.space().clone();
        let vac = FockVector::basis(space.clone(), &[0]).unwrap();
        assert_eq!(expectation_real(&vac, &n).unwrap(), 0.0);
        let two = FockVector::basis(space, &[2]).unwrap();
        assert_relative_eq!(expectation_real(&two, &n).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn expectation_rejects_non_hermitian_mean() {
        let a = FockOperator::ladder(2).unwrap();
        let space = a.space().clone();
        let amps = vec![c(0.6), C64::new(0.0, 0.8), c(0.0)];
        let psi = FockVector::new(space, amps).unwrap();
        // <a> = sqrt(1) * conj(0.6) * 0.8i
        assert!(matches!(expectation_real(&psi, &a), Err(Error::NotHermitian { .. })));
        assert_relative_eq!(expectation(&psi, &a).unwrap().im, 0.48, epsilon = 1e-12);
    }

    #[test]
    fn min_pm_of_identity_is_zero() {
        let space = FockSpace::uniform(2, 3).unwrap();
        let id = FockOperator::identity(space.clone());
        let psi = FockVector::basis(space, &[1, 2]).unwrap();
        let (var, sign) = variance_min_pm(&psi, &id, &id).unwrap();
        assert!(var.abs() < 1e-14);
        assert_eq!(sign, Sign::Minus);
    }

    #[test]
    fn vacuum_quadrature_pair_variance() {
        let space = FockSpace::uniform(2, 4).unwrap();
        let a = FockOperator::ladder(4).unwrap();
        let x = a.add(&a.adjoint()).unwrap();
        let x0 = x.embed(0, &space).unwrap();
        let x1 = x.embed(1, &space).unwrap();
        let vac = FockVector::basis(space, &[0, 0]).unwrap();
        let (var, sign) = variance_min_pm(&vac, &x0, &x1).unwrap();
        assert_relative_eq!(var, 2.0, epsilon = 1e-12);
        assert_eq!(sign, Sign::Minus);
    }

    #[test]
    fn displaced_vacuum_is_coherent() {
        let alpha = C64::new(0.7, -0.3);
        let v = displaced_number_state(alpha, 0, 30);
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-14);
        let mean_n: f64 = v.iter().enumerate().map(|(k, a)| k as f64 * a.norm_sqr()).sum();
        assert_relative_eq!(mean_n, alpha.norm_sqr(), epsilon = 1e-12);
    }

    #[test]
    fn displaced_number_matches_matrix_exponential() {
        // Independent route: D = exp(alpha a^dagger - conj(alpha) a) by Taylor series on a big space.
        let alpha = C64::new(0.4, 0.2);
        let big = 40;
        let a = FockOperator::ladder(big).unwrap();
        let gen = a.adjoint().scale(alpha).sub(&a.scale(alpha.conj())).unwrap();
        let space = a.space().clone();
        let n = 3;
        let mut term = FockVector::basis(space.clone(), &[n]).unwrap().amplitudes().to_vec();
        let mut sum = term.clone();
        for k in 1..60 {
            term = gen.apply_slice(&term).into_iter().map(|z| z / k as f64).collect();
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
        }
        let v = displaced_number_state(alpha, n, 12);
        for m in 0..=12 {
            assert!((v[m] - sum[m]).norm() < 1e-12, "m={m}");
        }
    }
}
