//! Single-copy purification by cross-Kerr coupling to a coherent probe.
//!
//! A probe `|α>` picks up phase `nφ` from `n` photons; projecting it onto `|β>`
//! maps the Schmidt coefficients `c_n -> d_n = <β|α e^{inφ}> c_n / √(π Q(β))`
//! with outcome density `Q(β) = π^{-1} sum_n |<β|α e^{inφ}>|² |c_n|²`.
//!
//! Overlaps are handled in the log domain. The series over `n` is truncated
//! per outcome: since `|<β|γ>|² <= exp(-(|β| - |α|)²)` for every `γ` on the
//! probe circle, the dropped tail is bounded by that factor times
//! `λ^{2(N+1)}`, and summation stops once this bound is below the relative
//! tolerance.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, pairwise_sum, Execution};
use crate::insep::{i_lambda, i_schmidt, i_schmidt_literal, tail_cutoff, SchmidtState, DEFAULT_TAIL_EPSILON};

type C64 = Complex64;

const Q_UNDERFLOW: f64 = 1e-300;
/// Hard cap on Schmidt terms evaluated for one outcome.
pub const DEFAULT_MAX_TERMS: usize = 1 << 14;

/// Which evaluator turns filtered coefficients into a degree of inseparability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InsepEvaluator {
    /// [`i_schmidt`], conjugation-aware.
    #[default]
    Conjugated,
    /// Real part of [`i_schmidt_literal`], for comparison only.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrSetup {
    pub probe_amp: C64,
    pub phase_shift: f64,
    pub lam: f64,
    /// Maximum number of Schmidt terms per outcome.
    pub cutoff: usize,
    pub tail_eps: f64,
    pub evaluator: InsepEvaluator,
}

impl KerrSetup {
    pub fn new(probe_amp: C64, phase_shift: f64, lam: f64) -> Result<Self> {
        Self::with_tolerance(probe_amp, phase_shift, lam, DEFAULT_TAIL_EPSILON)
    }

    pub fn with_tolerance(probe_amp: C64, phase_shift: f64, lam: f64, tail_eps: f64) -> Result<Self> {
        if !(probe_amp.re.is_finite() && probe_amp.im.is_finite() && phase_shift.is_finite()) {
            return Err(Error::InvalidParameter("probe amplitude and phase shift must be finite".into()));
        }
        let base = tail_cutoff(lam, tail_eps)?;
        Ok(Self {
            probe_amp,
            phase_shift,
            lam,
            cutoff: base.max(DEFAULT_MAX_TERMS),
            tail_eps,
            evaluator: InsepEvaluator::default(),
        })
    }

    /// Default probe `α = 3`, `φ = 0.1`.
    pub fn default_probe(lam: f64) -> Result<Self> {
        Self::new(C64::new(3.0, 0.0), 0.1, lam)
    }

    fn probe_point(&self, n: usize) -> C64 {
        self.probe_amp * C64::from_polar(1.0, n as f64 * self.phase_shift)
    }
}

/// `<β|γ> = exp(-|β|²/2 - |γ|²/2 + conj(β) γ)`.
pub fn coherent_overlap(beta: C64, gamma: C64) -> C64 {
    log_overlap(beta, gamma).exp()
}

fn log_overlap(beta: C64, gamma: C64) -> C64 {
    -0.5 * beta.norm_sqr() - 0.5 * gamma.norm_sqr() + beta.conj() * gamma
}

/// Truncated filter data for a single outcome.
struct Filtered {
    /// `log <β|γ_n> + log c_n - shift/2` for each kept `n`.
    log_amps: Vec<C64>,
    /// `sum_n |<β|γ_n>|² |c_n|² * exp(-shift)`.
    scaled_sum: f64,
    shift: f64,
}

impl Filtered {
    fn q(&self) -> f64 {
        (self.shift.exp() * self.scaled_sum) / std::f64::consts::PI
    }
}

fn filter(beta: C64, setup: &KerrSetup) -> Result<Filtered> {
    let lam = setup.lam;
    if !(0.0..1.0).contains(&lam) {
        return Err(Error::LambdaOutOfRange(lam));
    }
    let x = lam * lam;
    let log_norm = 0.5 * (1.0 - x).ln();
    let ln_lam = lam.ln();
    // Upper bound on every |<β|γ_n>|²: the probe circle is at distance ||β| - |α|| from β.
    let shift = -(beta.norm() - setup.probe_amp.norm()).powi(2);
    let min_terms = tail_cutoff(lam, setup.tail_eps)?;
    let mut log_amps = Vec::new();
    let mut scaled_sum = 0.0;
    let mut tail_factor = 1.0; // λ^{2(n+1)} after term n
    for n in 0..setup.cutoff.max(1) {
        let log_c = if n == 0 { log_norm } else { log_norm + n as f64 * ln_lam };
        let la = log_overlap(beta, setup.probe_point(n)) + log_c - 0.5 * shift;
        scaled_sum += (2.0 * la.re).exp();
        log_amps.push(la);
        tail_factor *= x;
        if n >= min_terms && tail_factor <= setup.tail_eps * scaled_sum {
            return Ok(Filtered { log_amps, scaled_sum, shift });
        }
    }
    let tail = if scaled_sum > 0.0 { tail_factor / scaled_sum } else { f64::INFINITY };
    Err(Error::SeriesNotConverged { cutoff: setup.cutoff, tail })
}

/// Outcome density `Q(β)`.
pub fn q_density(beta: C64, setup: &KerrSetup) -> Result<f64> {
    Ok(filter(beta, setup)?.q())
}

/// Filtered Schmidt coefficients `{d_n}`.
pub fn purified_coeffs(beta: C64, setup: &KerrSetup) -> Result<SchmidtState> {
    let f = filter(beta, setup)?;
    let q = f.q();
    if q < Q_UNDERFLOW {
        return Err(Error::OutcomeImpossible(q));
    }
    let norm = f.scaled_sum.sqrt();
    SchmidtState::new(f.log_amps.iter().map(|la| la.exp() / norm).collect())
}

/// Entanglement increment `Γ = E'(β) / E(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Finite(f64),
    /// `E(λ) = 0` while `E'(β) > 0`.
    Infinite,
}

/// Margin above 1 for membership in `Ω`, so that round-off on an unchanged
/// state is not counted as an improvement.
pub const OMEGA_MARGIN: f64 = 1e-12;

impl Gamma {
    pub fn exceeds_one(self) -> bool {
        match self {
            Gamma::Finite(g) => g > 1.0 + OMEGA_MARGIN,
            Gamma::Infinite => true,
        }
    }
}

/// `E = 1 - I` when `I < 1`, else 0.
pub fn entanglement_degree(i: f64) -> f64 {
    if i < 1.0 {
        1.0 - i
    } else {
        0.0
    }
}

fn increment(e_after: f64, e_before: f64) -> Gamma {
    if e_after == 0.0 {
        Gamma::Finite(0.0)
    } else if e_before == 0.0 {
        Gamma::Infinite
    } else {
        Gamma::Finite(e_after / e_before)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurificationOutcomeB {
    pub beta: C64,
    pub q: f64,
    pub filtered: SchmidtState,
    pub i_after: f64,
    pub gamma: Gamma,
}

fn evaluate_i(state: &SchmidtState, evaluator: InsepEvaluator) -> Result<f64> {
    match evaluator {
        InsepEvaluator::Conjugated => i_schmidt(state),
        InsepEvaluator::Literal => Ok(i_schmidt_literal(state).re),
    }
}

/// Full outcome record for one `β`.
pub fn outcome(beta: C64, setup: &KerrSetup) -> Result<PurificationOutcomeB> {
    let q = q_density(beta, setup)?;
    let filtered = purified_coeffs(beta, setup)?;
    let i_after = evaluate_i(&filtered, setup.evaluator)?;
    let e_before = entanglement_degree(i_lambda(setup.lam)?);
    let gamma = increment(entanglement_degree(i_after), e_before);
    Ok(PurificationOutcomeB { beta, q, filtered, i_after, gamma })
}

pub fn gamma_increment(beta: C64, setup: &KerrSetup) -> Result<Gamma> {
    Ok(outcome(beta, setup)?.gamma)
}

/// Square midpoint grid `[-radius, radius]²` with `points` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub radius: f64,
    pub points: usize,
    /// Recompute on a grid refined 2x per axis and require agreement of `Υ`.
    pub check_refinement: bool,
    pub rel_tol: f64,
}

pub const DEFAULT_GRID_POINTS: usize = 161;
pub const DEFAULT_REFINEMENT_TOL: f64 = 1e-3;

impl GridSpec {
    /// `radius = |α| + 6`, 161 points, refinement check at `1e-3`.
    pub fn for_setup(setup: &KerrSetup) -> Self {
        Self {
            radius: setup.probe_amp.norm() + 6.0,
            points: DEFAULT_GRID_POINTS,
            check_refinement: true,
            rel_tol: DEFAULT_REFINEMENT_TOL,
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / self.points as f64
    }

    /// Node `k` in row-major order (real part slowest).
    pub fn node(&self, k: usize) -> C64 {
        let h = self.spacing();
        let (i, j) = (k / self.points, k % self.points);
        C64::new(-self.radius + (i as f64 + 0.5) * h, -self.radius + (j as f64 + 0.5) * h)
    }

    pub fn len(&self) -> usize {
        self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    fn refined(&self) -> Self {
        Self { points: 2 * self.points, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) || self.points < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs positive radius and at least 2 points (radius {}, points {})",
                self.radius, self.points
            )));
        }
        Ok(())
    }
}

/// `Q`-weighted quadrature of `f` over a grid, reduced in fixed order.
pub fn integrate_q<F>(setup: &KerrSetup, grid: &GridSpec, exec: Execution, f: F) -> Result<f64>
where
    F: Fn(C64, f64) -> f64 + Sync + Send,
{
    grid.validate()?;
    let vals = map_indexed(grid.len(), exec, |k| {
        let beta = grid.node(k);
        q_density(beta, setup).map(|q| f(beta, q))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let h = grid.spacing();
    Ok(pairwise_sum(&vals) * h * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upsilon {
    Finite(f64),
    Infinite,
    /// No outcome with `Γ > 1`, or `λ = 0`.
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyResult {
    pub upsilon: Upsilon,
    /// `None` at the singular point `λ = 0`.
    pub xi: Option<f64>,
    /// Area fraction of the grid with `Γ > 1`. Resolved below cell size when
    /// `Υ` is finite, counted per node otherwise.
    pub omega_fraction: f64,
    pub omega_empty: bool,
    pub singular: bool,
    pub grid: GridSpec,
}

struct GridPass {
    upsilon: Upsilon,
    omega_fraction: f64,
}

/// Sub-samples per axis inside a cell straddling the boundary of `Ω`.
const BOUNDARY_SUBSAMPLES: usize = 8;

/// Node values on the grid: `q²`, its logarithm, and `Γ - 1`.
struct NodeField<'a> {
    points: usize,
    weight: &'a [f64],
    log_weight: &'a [f64],
    excess: &'a [f64],
}

impl NodeField<'_> {
    fn at(&self, field: &[f64], i: isize, j: isize) -> f64 {
        let clamp = |k: isize| k.clamp(0, self.points as isize - 1) as usize;
        field[clamp(i) * self.points + clamp(j)]
    }

    fn straddles(&self, i: usize, j: usize) -> bool {
        let inside = |g: f64| g > OMEGA_MARGIN;
        let centre = inside(self.excess[i * self.points + j]);
        (-1..=1).any(|di| (-1..=1).any(|dj| inside(self.at(self.excess, i as isize + di, j as isize + dj)) != centre))
    }

    /// `(∫ q² 1[Γ>1], ∫ q² (Γ-1)⁺, measure of Ω)` over one cell, in units of the cell area.
    fn cell(&self, i: usize, j: usize) -> (f64, f64, f64) {
        let k = i * self.points + j;
        if !self.straddles(i, j) {
            return if self.excess[k] > OMEGA_MARGIN {
                (self.weight[k], self.weight[k] * self.excess[k], 1.0)
            } else {
                (0.0, 0.0, 0.0)
            };
        }
        // Bilinear interpolation toward the neighbouring nodes in each quadrant.
        let m = BOUNDARY_SUBSAMPLES;
        let (mut den, mut num, mut area) = (0.0, 0.0, 0.0);
        for a in 0..m {
            for b in 0..m {
                let u = (a as f64 + 0.5) / m as f64 - 0.5;
                let v = (b as f64 + 0.5) / m as f64 - 0.5;
                let (di, dj) = (if u < 0.0 { -1 } else { 1 }, if v < 0.0 { -1 } else { 1 });
                let (s, t) = (u.abs(), v.abs());
                let (ii, jj) = (i as isize, j as isize);
                let interp = |f: &[f64]| {
                    self.at(f, ii, jj) * (1.0 - s) * (1.0 - t)
                        + self.at(f, ii + di, jj) * s * (1.0 - t)
                        + self.at(f, ii, jj + dj) * (1.0 - s) * t
                        + self.at(f, ii + di, jj + dj) * s * t
                };
                let g = interp(self.excess);
                if g > OMEGA_MARGIN {
                    let w = interp(self.log_weight).exp();
                    den += w;
                    num += w * g;
                    area += 1.0;
                }
            }
        }
        let n = (m * m) as f64;
        (den / n, num / n, area / n)
    }
}

fn grid_pass(setup: &KerrSetup, grid: &GridSpec, exec: Execution) -> Result<GridPass> {
    let nodes = map_indexed(grid.len(), exec, |k| outcome(grid.node(k), setup).map(|o| (o.q * o.q, o.gamma)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    if !nodes.iter().any(|n| n.1.exceeds_one()) {
        return Ok(GridPass { upsilon: Upsilon::Undefined, omega_fraction: 0.0 });
    }
    if nodes.iter().any(|n| n.1 == Gamma::Infinite) {
        let count = nodes.iter().filter(|n| n.1.exceeds_one()).count();
        return Ok(GridPass { upsilon: Upsilon::Infinite, omega_fraction: count as f64 / grid.len() as f64 });
    }
    let weight: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let excess: Vec<f64> = nodes
        .iter()
        .map(|n| match n.1 {
            Gamma::Finite(g) => g - 1.0,
            Gamma::Infinite => unreachable!("handled above"),
        })
        .collect();
    let log_weight: Vec<f64> = weight.iter().map(|w| w.max(f64::MIN_POSITIVE).ln()).collect();
    let field = NodeField { points: grid.points, weight: &weight, log_weight: &log_weight, excess: &excess };
    let cells = map_indexed(grid.len(), exec, |k| field.cell(k / grid.points, k % grid.points));
    let den = pairwise_sum(&cells.iter().map(|c| c.0).collect::<Vec<_>>());
    let num = pairwise_sum(&cells.iter().map(|c| c.1).collect::<Vec<_>>());
    let area = pairwise_sum(&cells.iter().map(|c| c.2).collect::<Vec<_>>());
    let upsilon = if den > 0.0 { Upsilon::Finite(1.0 + num / den) } else { Upsilon::Undefined };
    Ok(GridPass { upsilon, omega_fraction: area / grid.len() as f64 })
}

/// Efficiency `Ξ = 1 - 1/Υ`, `Υ` the `Q²`-weighted mean of `Γ` over `Ω = {Γ > 1}`.
///
/// Cells away from the boundary of `Ω` use the midpoint rule. Cells whose
/// neighbourhood changes sign in `Γ - 1` are sub-sampled, interpolating
/// `Γ - 1` and `ln Q²` bilinearly between nodes.
///
/// Conventions: any `Γ = ∞` node in `Ω` gives `Υ = ∞`, `Ξ = 1`; an empty `Ω`
/// gives `Ξ = 0`; `λ = 0` is singular and leaves `Ξ` undefined.
pub fn efficiency(setup: &KerrSetup, grid: &GridSpec, exec: Execution) -> Result<EfficiencyResult> {
    grid.validate()?;
    if setup.lam == 0.0 {
        let pass = grid_pass(setup, grid, exec)?;
        return Ok(EfficiencyResult {
            upsilon: Upsilon::Undefined,
            xi: None,
            omega_fraction: pass.omega_fraction,
            omega_empty: pass.omega_fraction == 0.0,
            singular: true,
            grid: *grid,
        });
    }
    let pass = grid_pass(setup, grid, exec)?;
    let xi = match pass.upsilon {
        Upsilon::Finite(u) => {
            if grid.check_refinement {
                if let Upsilon::Finite(refined) = grid_pass(setup, &grid.refined(), exec)?.upsilon {
                    if ((refined - u) / u).abs() > grid.rel_tol {
                        return Err(Error::QuadratureNotConverged { value: u, refined });
                    }
                } else {
                    return Err(Error::QuadratureNotConverged { value: u, refined: f64::NAN });
                }
            }
            1.0 - 1.0 / u
        }
        Upsilon::Infinite => 1.0,
        Upsilon::Undefined => 0.0,
    };
    Ok(EfficiencyResult {
        upsilon: pass.upsilon,
        xi: Some(xi),
        omega_fraction: pass.omega_fraction,
        omega_empty: matches!(pass.upsilon, Upsilon::Undefined),
        singular: false,
        grid: *grid,
    })
}

/// Draws `β ~ Q` as a Gaussian mixture: `n` with weight `|c_n|²`, then a
/// circular complex Gaussian of unit total variance around `α e^{inφ}`.
pub fn sample_beta<R: Rng + ?Sized>(setup: &KerrSetup, rng: &mut R) -> Result<C64> {
    if !(0.0..1.0).contains(&setup.lam) {
        return Err(Error::LambdaOutOfRange(setup.lam));
    }
    let x = setup.lam * setup.lam;
    let n = if x == 0.0 {
        0
    } else {
        let u: f64 = rng.random();
        // P(n' >= n) = x^n
        ((1.0 - u).ln() / x.ln()).floor() as usize
    };
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Ok(setup.probe_point(n) + C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2)
}

/// `count` outcomes, sample `i` on ChaCha stream `i` under `seed`.
pub fn sample_betas(setup: &KerrSetup, seed: u64, count: usize, exec: Execution) -> Result<Vec<C64>> {
    map_indexed(count, exec, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        sample_beta(setup, &mut rng)
    })
    .into_iter()
    .collect()
}
