//! Probe states: qudit pure and entangled states, and truncated Fock-space
//! bosonic states (coherent, displaced squeezed, two-mode squeezed vacuum).
//!
//! Fock amplitudes cover levels `|0>, ..., |n_trunc - 1>`. A constructor
//! computes the exact (untruncated) amplitudes on those levels, records the
//! missing probability mass as `truncation_deficit`, and renormalizes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, eig_hermitian, ComplexMatrix, ComplexVector, MatrixJson};

/// Tolerances a matrix must meet to count as a density operator.
pub const STATE_HERMITIAN_TOL: f64 = 1e-12;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_EIGEN_TOL: f64 = 1e-10;

/// Trace-one positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates `matrix` (Hermitian, unit trace, positive semidefinite).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        linalg::ensure_square(&matrix)?;
        if matrix.nrows() == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let residual = linalg::hermitian_residual(&matrix);
        if residual > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (residual {residual:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > STATE_TRACE_TOL || trace.im.abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let matrix = linalg::hermitian_part(&matrix);
        let eig = eig_hermitian(&matrix)?;
        let lowest = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if lowest < -STATE_EIGEN_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lowest:e}"
            )));
        }
        Ok(DensityOperator { matrix })
    }

    /// Wraps a matrix known to be a density operator by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        DensityOperator {
            matrix: linalg::hermitian_part(&matrix),
        }
    }

    /// `|v><v| / <v|v>`.
    pub fn from_pure(v: &ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        Ok(DensityOperator {
            matrix: linalg::dyad(&v.unscale(norm)),
        })
    }

    /// Computational basis state `|index><index|`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::dims(dim, index + 1));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(DensityOperator { matrix: m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: ComplexMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from(&self.matrix)
    }

    pub fn from_json(json: &MatrixJson) -> Result<Self> {
        DensityOperator::new(ComplexMatrix::try_from(json)?)
    }
}

/// Normalized state vector on a product of local dimensions `modes`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    modes: Vec<usize>,
    amplitudes: ComplexVector,
    truncation_deficit: f64,
}

impl PureState {
    /// Normalizes `amplitudes` and rotates the global phase so that the
    /// first nonzero amplitude is real positive.
    pub fn new(modes: Vec<usize>, amplitudes: ComplexVector) -> Result<Self> {
        Self::with_deficit(modes, amplitudes, 0.0)
    }

    fn with_deficit(
        modes: Vec<usize>,
        mut amplitudes: ComplexVector,
        deficit: f64,
    ) -> Result<Self> {
        let dim: usize = modes.iter().product();
        if modes.is_empty() || dim != amplitudes.len() {
            return Err(Error::dims(dim, amplitudes.len()));
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite amplitudes".into()));
        }
        amplitudes.unscale_mut(norm);
        if let Some(first) = amplitudes.iter().find(|z| z.norm() > 0.0).copied() {
            let phase = first.conj() / first.norm();
            amplitudes.apply(|z| *z *= phase);
        }
        Ok(PureState {
            modes,
            amplitudes,
            truncation_deficit: deficit,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// Probability mass lost to Fock truncation before renormalization.
    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: linalg::dyad(&self.amplitudes),
        }
    }

    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::dims(self.dim(), other.dim()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        check_mode(&self.modes, mode)?;
        let mut acc = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            acc += a.norm_sqr() * occupation(&self.modes, i, mode) as f64;
        }
        Ok(acc)
    }

    /// The state as a dyad in the JSON matrix format.
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from(&linalg::dyad(&self.amplitudes))
    }
}

fn check_mode(modes: &[usize], mode: usize) -> Result<()> {
    if mode >= modes.len() {
        return Err(Error::dims(modes.len(), mode + 1));
    }
    Ok(())
}

/// Fock level of `mode` in the product-basis index `i` (row-major, mode 0 slowest).
fn occupation(modes: &[usize], i: usize, mode: usize) -> usize {
    let stride: usize = modes[mode + 1..].iter().product();
    (i / stride) % modes[mode]
}

/// `tr[rho n_mode]` for a density operator on the product of Fock spaces `modes`.
pub fn mean_photon_number(rho: &DensityOperator, modes: &[usize], mode: usize) -> Result<f64> {
    check_mode(modes, mode)?;
    let dim: usize = modes.iter().product();
    if dim != rho.dim() {
        return Err(Error::dims(dim, rho.dim()));
    }
    Ok((0..dim)
        .map(|i| rho.matrix()[(i, i)].re * occupation(modes, i, mode) as f64)
        .sum())
}

/// Schmidt coefficients of a bipartite pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtVector(Vec<f64>);

impl SchmidtVector {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("empty Schmidt vector".into()));
        }
        if coefficients.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter(
                "Schmidt coefficients must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = coefficients.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Schmidt coefficients sum to {total}, expected 1"
            )));
        }
        Ok(SchmidtVector(coefficients))
    }

    pub fn uniform(n: usize) -> Self {
        SchmidtVector(vec![1.0 / n as f64; n])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Split of a single-mode probe's mean photon number between displacement
/// (`n_bar = |α|^2`) and squeezing (`m_bar = sinh^2 r`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    n_total: f64,
    m_bar: f64,
    n_bar: f64,
}

impl PowerBudget {
    pub fn new(n_bar: f64, m_bar: f64) -> Result<Self> {
        if !(n_bar >= 0.0 && m_bar >= 0.0) || !(n_bar + m_bar).is_finite() {
            return Err(Error::InvalidParameter(format!(
                "photon numbers must be finite and nonnegative (n_bar={n_bar}, m_bar={m_bar})"
            )));
        }
        Ok(PowerBudget {
            n_total: n_bar + m_bar,
            m_bar,
            n_bar,
        })
    }

    /// Puts `ratio * n_total` photons into squeezing and the rest into displacement.
    pub fn from_ratio(n_total: f64, ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::InvalidParameter(format!(
                "squeezing ratio must lie in [0, 1], got {ratio}"
            )));
        }
        let m_bar = ratio * n_total;
        let n_bar = if ratio == 1.0 { 0.0 } else { n_total - m_bar };
        Self::new(n_bar, m_bar)
    }

    pub fn n_total(&self) -> f64 {
        self.n_total
    }

    pub fn m_bar(&self) -> f64 {
        self.m_bar
    }

    pub fn n_bar(&self) -> f64 {
        self.n_bar
    }

    /// Squeezing parameter `r` with `sinh^2 r = m_bar`.
    pub fn squeezing(&self) -> f64 {
        self.m_bar.sqrt().asinh()
    }
}

/// Truncation policy for Fock-space constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Largest tolerated probability mass outside the retained levels.
    pub bound: f64,
    /// Largest number of levels retained per mode.
    pub max_levels: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            bound: 1e-12,
            max_levels: 120,
        }
    }
}

impl Truncation {
    pub fn with_bound(bound: f64) -> Self {
        Truncation {
            bound,
            ..Default::default()
        }
    }

    pub fn coherent(&self, alpha: Complex64) -> Result<PureState> {
        let full = coherent_amplitudes(alpha, self.max_levels);
        let n = self.levels_needed(&full)?;
        coherent_state(alpha, n, self.bound)
    }

    pub fn squeezed_coherent(&self, alpha: Complex64, zeta: Complex64) -> Result<PureState> {
        let full = squeezed_amplitudes(alpha, zeta, self.max_levels);
        let n = self.levels_needed(&full)?;
        squeezed_coherent_state(alpha, zeta, n, self.bound)
    }

    pub fn tmsv(&self, n_mean: f64) -> Result<PureState> {
        let lambda2 = tmsv_lambda_sq(n_mean)?;
        let n = if lambda2 == 0.0 {
            1
        } else {
            // smallest n with lambda2^n <= bound
            let est = (self.bound.ln() / lambda2.ln()).ceil().max(1.0);
            if est > self.max_levels as f64 {
                return Err(Error::TruncationTooSmall {
                    levels: self.max_levels,
                    deficit: lambda2.powi(self.max_levels as i32),
                    bound: self.bound,
                });
            }
            let mut n = est as usize;
            while n > 1 && lambda2.powi(n as i32 - 1) <= self.bound {
                n -= 1;
            }
            while lambda2.powi(n as i32) > self.bound {
                n += 1;
            }
            n
        };
        tmsv_state(n_mean, n, self.bound)
    }

    /// Smallest level count whose captured mass reaches `1 - bound`.
    fn levels_needed(&self, amplitudes: &[Complex64]) -> Result<usize> {
        let mut captured = 0.0;
        for (k, a) in amplitudes.iter().enumerate() {
            captured += a.norm_sqr();
            if 1.0 - captured <= self.bound {
                return Ok(k + 1);
            }
        }
        Err(Error::TruncationTooSmall {
            levels: amplitudes.len(),
            deficit: (1.0 - captured).max(0.0),
            bound: self.bound,
        })
    }
}

fn check_levels(n_trunc: usize) -> Result<()> {
    if n_trunc == 0 {
        return Err(Error::InvalidParameter("n_trunc must be positive".into()));
    }
    Ok(())
}

fn finish_single_mode(amplitudes: Vec<Complex64>, bound: f64) -> Result<PureState> {
    let captured: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let deficit = (1.0 - captured).max(0.0);
    if deficit > bound {
        return Err(Error::TruncationTooSmall {
            levels: amplitudes.len(),
            deficit,
            bound,
        });
    }
    let n = amplitudes.len();
    PureState::with_deficit(vec![n], ComplexVector::from_vec(amplitudes), deficit)
}

fn coherent_amplitudes(alpha: Complex64, n_trunc: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_trunc);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..n_trunc {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Fock amplitudes of `D(α) S(ζ) |0>` on the first `n_trunc` levels, with
/// `S(ζ) = exp[(ζ* a^2 - ζ a†^2) / 2]`.
///
/// The state is the eigenvector of `μ a + ν a†` with eigenvalue `μα + να*`
/// (`μ = cosh r`, `ν = e^{iθ} sinh r`), which gives a three-term recursion
/// seeded by the vacuum overlap.
fn squeezed_amplitudes(alpha: Complex64, zeta: Complex64, n_trunc: usize) -> Vec<Complex64> {
    let r = zeta.norm();
    let mu = r.cosh();
    let nu = if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        zeta / r * r.sinh()
    };
    let beta = alpha * mu + nu * alpha.conj();
    let c0 =
        (-0.5 * alpha.norm_sqr() - nu * alpha.conj() * alpha.conj() / (2.0 * mu)).exp() / mu.sqrt();

    let mut out = Vec::with_capacity(n_trunc);
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = c0;
    for n in 0..n_trunc {
        out.push(cur);
        let nf = n as f64;
        let next = (beta * cur - nu * nf.sqrt() * prev) / (mu * (nf + 1.0).sqrt());
        prev = cur;
        cur = next;
    }
    out
}

/// Coherent state `|α>` on `n_trunc` Fock levels.
pub fn coherent_state(alpha: Complex64, n_trunc: usize, bound: f64) -> Result<PureState> {
    check_levels(n_trunc)?;
    finish_single_mode(coherent_amplitudes(alpha, n_trunc), bound)
}

/// Displaced squeezed state `D(α) S(ζ) |0>` (squeeze first, then displace)
/// on `n_trunc` Fock levels, `ζ = r e^{iθ}`.
pub fn squeezed_coherent_state(
    alpha: Complex64,
    zeta: Complex64,
    n_trunc: usize,
    bound: f64,
) -> Result<PureState> {
    check_levels(n_trunc)?;
    finish_single_mode(squeezed_amplitudes(alpha, zeta, n_trunc), bound)
}

fn tmsv_lambda_sq(n_mean: f64) -> Result<f64> {
    if !(n_mean >= 0.0) || !n_mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mean photon number must be finite and nonnegative, got {n_mean}"
        )));
    }
    Ok(n_mean / (1.0 + n_mean))
}

/// Two-mode squeezed vacuum `sqrt(1 - λ²) Σ λ^n |n>|n>` with
/// `λ² = n_mean / (1 + n_mean)`, each mode truncated to `n_trunc` levels.
pub fn tmsv_state(n_mean: f64, n_trunc: usize, bound: f64) -> Result<PureState> {
    check_levels(n_trunc)?;
    let lambda2 = tmsv_lambda_sq(n_mean)?;
    let deficit = lambda2.powi(n_trunc as i32);
    if deficit > bound {
        return Err(Error::TruncationTooSmall {
            levels: n_trunc,
            deficit,
            bound,
        });
    }
    let lambda = lambda2.sqrt();
    let head = (1.0 - lambda2).sqrt();
    let mut amps = ComplexVector::zeros(n_trunc * n_trunc);
    let mut c = head;
    for n in 0..n_trunc {
        amps[n * n_trunc + n] = Complex64::new(c, 0.0);
        c *= lambda;
    }
    PureState::with_deficit(vec![n_trunc, n_trunc], amps, deficit)
}

/// `Σ_k sqrt(λ_k) |k> ⊗ |k>` on an `n × n` system.
pub fn schmidt_entangled_qudit(lambdas: &SchmidtVector, n: usize) -> Result<PureState> {
    if lambdas.len() != n {
        return Err(Error::dims(n, lambdas.len()));
    }
    let mut amps = ComplexVector::zeros(n * n);
    for (k, &l) in lambdas.coefficients().iter().enumerate() {
        amps[k * n + k] = Complex64::new(l.sqrt(), 0.0);
    }
    PureState::new(vec![n, n], amps)
}
