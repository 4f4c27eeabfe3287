//! Dense complex Hermitian linear algebra.
//!
//! Everything here works on [`ComplexMatrix`] (a dense `nalgebra` matrix of
//! `Complex64`). Eigendecompositions are returned sorted by descending
//! eigenvalue with a fixed phase convention so that results are reproducible.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::DensityOperator;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Default relative eigenvalue cutoff used to decide numerical rank.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Largest tolerated `max |H - H^dagger|` for inputs to [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |H_ij - conj(H_ji)|`.
pub fn hermitian_residual(h: &ComplexMatrix) -> f64 {
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

/// Returns `(H + H^dagger) / 2`.
pub fn hermitian_part(h: &ComplexMatrix) -> ComplexMatrix {
    (h + h.adjoint()).scale(0.5)
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `<v| M |v>`.
pub fn expectation(m: &ComplexMatrix, v: &ComplexVector) -> Complex64 {
    v.dotc(&(m * v))
}

/// Dyad `|v><v|`.
pub fn dyad(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Tensor product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Σ λ_k |v_k><v_k|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvectors.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            out += (v * v.adjoint()).scale(lambda);
        }
        out
    }

    /// `max |<v_i|v_j> - δ_ij|` over the eigenvector set.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        max_abs_diff(&gram, &ComplexMatrix::identity(gram.nrows(), gram.ncols()))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back in descending order. Each eigenvector is rotated so
/// that its largest-magnitude component (the first one, on ties) is real and
/// positive.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let n = ensure_square(h)?;
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    let residual = hermitian_residual(h);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }

    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let mut v = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut v);
        eigenvectors.set_column(dst, &v);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Rotates `v` so that its largest-magnitude component is real positive.
pub(crate) fn fix_phase(v: &mut ComplexVector) {
    let peak = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if peak == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .find(|z| z.norm() >= peak * (1.0 - 1e-9))
        .copied()
        .unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    v.apply(|z| *z *= phase);
}

/// Hermitian idempotent matrix with its recorded rank.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    /// Projector onto the span of orthonormal `columns`.
    pub fn from_orthonormal_columns(columns: &ComplexMatrix) -> Self {
        let matrix = hermitian_part(&(columns * columns.adjoint()));
        Projector {
            matrix,
            rank: columns.ncols(),
        }
    }

    /// Rank-one projector onto the normalized direction of `v`.
    pub fn onto(v: &ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot project onto a zero or non-finite vector".into(),
            ));
        }
        let u = v.unscale(norm);
        Ok(Projector {
            matrix: dyad(&u),
            rank: 1,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            matrix: ComplexMatrix::identity(dim, dim),
            rank: dim,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Projector {
            matrix: ComplexMatrix::zeros(dim, dim),
            rank: 0,
        }
    }

    /// Projector onto the computational basis states listed in `indices`.
    pub fn diagonal(dim: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        let mut rank = 0;
        for i in indices {
            if i >= dim {
                return Err(Error::dims(dim, i + 1));
            }
            if matrix[(i, i)] == ZERO {
                matrix[(i, i)] = ONE;
                rank += 1;
            }
        }
        Ok(Projector { matrix, rank })
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        let d = self.dim();
        Projector {
            matrix: ComplexMatrix::identity(d, d) - &self.matrix,
            rank: d - self.rank,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `(hermitian, idempotent, trace)` residuals against the projector laws.
    pub fn residuals(&self) -> (f64, f64, f64) {
        let herm = hermitian_residual(&self.matrix);
        let idem = max_abs_diff(&(&self.matrix * &self.matrix), &self.matrix);
        let tr = (self.matrix.trace().re - self.rank as f64).abs();
        (herm, idem, tr)
    }
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    Ok(())
}

/// Projector onto the eigenvectors of a positive semidefinite `h` whose
/// eigenvalues exceed `rel_tol * λ_max`.
pub fn spectral_support(h: &ComplexMatrix, rel_tol: f64) -> Result<Projector> {
    check_rel_tol(rel_tol)?;
    let eig = eig_hermitian(h)?;
    let n = eig.len();
    let top = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Ok(Projector::zero(n));
    }
    let rank = eig
        .eigenvalues
        .iter()
        .take_while(|&&l| l > rel_tol * top)
        .count();
    Ok(Projector::from_orthonormal_columns(
        &eig.eigenvectors.columns(0, rank).into_owned(),
    ))
}

/// Projector onto the support of a density operator.
pub fn support_projector(rho: &DensityOperator, rel_tol: f64) -> Result<Projector> {
    spectral_support(rho.matrix(), rel_tol)
}

/// Projector onto the span of the union of the column spaces of `projectors`,
/// obtained by spectral thresholding of their sum.
pub fn union_projector(projectors: &[Projector], rel_tol: f64) -> Result<Projector> {
    check_rel_tol(rel_tol)?;
    let first = projectors
        .first()
        .ok_or_else(|| Error::InvalidParameter("union of an empty projector list".into()))?;
    let d = first.dim();
    let mut sum = ComplexMatrix::zeros(d, d);
    for p in projectors {
        if p.dim() != d {
            return Err(Error::dims(d, p.dim()));
        }
        sum += p.matrix();
    }
    spectral_support(&sum, rel_tol)
}

/// Partial trace of a bipartite operator on `dims = (d_a, d_b)`, keeping
/// subsystem `keep` (0 for A, 1 for B).
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: (usize, usize),
    keep: usize,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let n = ensure_square(rho)?;
    if da * db != n {
        return Err(Error::dims(n, da * db));
    }
    match keep {
        0 => Ok(ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|b| rho[(i * db + b, j * db + b)]).sum()
        })),
        1 => Ok(ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|a| rho[(a * db + i, a * db + j)]).sum()
        })),
        other => Err(Error::InvalidParameter(format!(
            "subsystem index {other} out of range for a bipartite system"
        ))),
    }
}

/// JSON form of a complex matrix: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim_rows: usize,
    pub dim_cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson {
            dim_rows: rows,
            dim_cols: cols,
            re,
            im,
        }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(json: &MatrixJson) -> Result<Self> {
        if json.dim_rows == 0 || json.dim_cols == 0 {
            return Err(Error::Parse("matrix dimensions must be positive".into()));
        }
        let count = json.dim_rows * json.dim_cols;
        if json.re.len() != count || json.im.len() != count {
            return Err(Error::Parse(format!(
                "expected {count} entries in re and im, got {} and {}",
                json.re.len(),
                json.im.len()
            )));
        }
        let m = ComplexMatrix::from_fn(json.dim_rows, json.dim_cols, |i, j| {
            let k = i * json.dim_cols + j;
            Complex64::new(json.re[k], json.im[k])
        });
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}
