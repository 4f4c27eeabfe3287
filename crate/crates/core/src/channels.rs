//! Completely positive maps: qudit depolarization and bosonic linear loss.
//!
//! Loss is implemented in Kraus form. Photon loss only lowers Fock levels,
//! so the truncated Kraus set is exactly complete on the retained levels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::states::DensityOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `rho -> (1 - p) rho + (p / n) I` on an `n`-dimensional system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizingChannel {
    dim: usize,
    p: f64,
}

impl DepolarizingChannel {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(DepolarizingChannel { dim, p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    /// Kraus form built from the `n^2` Weyl operators `X^a Z^b`, which twirl
    /// any operator to its trace times `I / n`.
    pub fn kraus(&self) -> KrausSet {
        let n = self.dim;
        let mut ops = Vec::with_capacity(n * n + 1);
        if self.p < 1.0 {
            ops.push(ComplexMatrix::identity(n, n).scale((1.0 - self.p).sqrt()));
        }
        if self.p > 0.0 {
            let w = self.p.sqrt() / n as f64;
            let omega = 2.0 * std::f64::consts::PI / n as f64;
            for a in 0..n {
                for b in 0..n {
                    // X^a Z^b |j> = ω^{bj} |j + a>
                    let mut m = ComplexMatrix::zeros(n, n);
                    for j in 0..n {
                        m[((j + a) % n, j)] = Complex64::from_polar(w, omega * (b * j) as f64);
                    }
                    ops.push(m);
                }
            }
        }
        KrausSet { operators: ops }
    }
}

pub fn depolarize(rho: &DensityOperator, channel: &DepolarizingChannel) -> Result<DensityOperator> {
    let n = channel.dim;
    if rho.dim() != n {
        return Err(Error::dims(n, rho.dim()));
    }
    let p = channel.p;
    let out = rho.matrix().scale(1.0 - p) + ComplexMatrix::identity(n, n).scale(p / n as f64);
    Ok(DensityOperator::from_trusted(out))
}

/// Linear loss with transmittance `T = e^{-g}` and loss `R = 1 - T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    transmittance: f64,
}

impl LossChannel {
    pub fn from_transmittance(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "transmittance must lie in [0, 1], got {t}"
            )));
        }
        Ok(LossChannel { transmittance: t })
    }

    pub fn from_loss(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "loss must lie in [0, 1], got {r}"
            )));
        }
        Ok(LossChannel {
            transmittance: 1.0 - r,
        })
    }

    /// Channel generated by `exp[g (K_- - K_0)]`.
    pub fn from_rate(g: f64) -> Result<Self> {
        if !(g >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "loss rate must be nonnegative, got {g}"
            )));
        }
        Ok(LossChannel {
            transmittance: (-g).exp(),
        })
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn loss(&self) -> f64 {
        1.0 - self.transmittance
    }

    pub fn rate(&self) -> f64 {
        -self.transmittance.ln()
    }
}

/// Operator-sum representation `rho -> Σ A_k rho A_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus set".into()))?;
        let d = linalg::ensure_square(first)?;
        for op in &operators {
            if op.shape() != (d, d) {
                return Err(Error::dims(d, op.nrows().max(op.ncols())));
            }
            if !linalg::is_finite(op) {
                return Err(Error::NonFinite);
            }
        }
        Ok(KrausSet { operators })
    }

    pub fn identity(dim: usize) -> Self {
        KrausSet {
            operators: vec![ComplexMatrix::identity(dim, dim)],
        }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// `max |Σ A_k† A_k - I|`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for a in &self.operators {
            sum += a.adjoint() * a;
        }
        linalg::max_abs_diff(&sum, &ComplexMatrix::identity(d, d))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Beam-splitter Kraus operators of linear loss on `n_trunc` Fock levels:
/// `A_k = Σ_n sqrt(C(n, k) T^{n-k} R^k) |n - k><n|`, one per number of lost
/// photons. Operators that vanish identically are dropped.
pub fn loss_kraus(channel: &LossChannel, n_trunc: usize) -> KrausSet {
    let t = channel.transmittance;
    let r = channel.loss();
    let mut ops = Vec::with_capacity(n_trunc);
    for k in 0..n_trunc {
        let mut a = ComplexMatrix::zeros(n_trunc, n_trunc);
        let mut nonzero = false;
        for n in k..n_trunc {
            let w = (binomial(n, k) * t.powi((n - k) as i32) * r.powi(k as i32)).sqrt();
            if w > 0.0 {
                a[(n - k, n)] = Complex64::new(w, 0.0);
                nonzero = true;
            }
        }
        if nonzero {
            ops.push(a);
        }
    }
    KrausSet { operators: ops }
}

/// Nonzero entries of `a` as `(row, col, value)`.
fn nonzeros(a: &ComplexMatrix) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Index of `(local, env)` in a bipartite product basis where the channel
/// acts on subsystem `which` of `(d_a, d_b)`.
#[derive(Clone, Copy)]
struct Embedding {
    which: usize,
    d_b: usize,
    d_env: usize,
}

impl Embedding {
    fn index(&self, local: usize, env: usize) -> usize {
        if self.which == 0 {
            local * self.d_b + env
        } else {
            env * self.d_b + local
        }
    }
}

/// `M (A ⊗ I)†` with the identity on the environment, using only the
/// nonzero entries of `A`.
fn right_apply_adjoint(
    m: &ComplexMatrix,
    nz: &[(usize, usize, Complex64)],
    emb: Embedding,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.nrows(), m.ncols());
    for &(row, col, v) in nz {
        let w = v.conj();
        for e in 0..emb.d_env {
            let dst = emb.index(row, e);
            let src = emb.index(col, e);
            out.column_mut(dst)
                .axpy(w, &m.column(src), Complex64::new(1.0, 0.0));
        }
    }
    out
}

fn conjugate_sum(kraus: &KrausSet, rho: &ComplexMatrix, emb: Embedding) -> ComplexMatrix {
    let d = rho.nrows();
    let mut acc = ComplexMatrix::zeros(d, d);
    for a in &kraus.operators {
        let nz = nonzeros(a);
        if nz.is_empty() {
            continue;
        }
        // B rho B† = (B (rho B†)††)... computed as ((rho B†)† B†)†
        let w = right_apply_adjoint(rho, &nz, emb);
        let z = right_apply_adjoint(&w.adjoint(), &nz, emb);
        acc += z.adjoint();
    }
    acc
}

/// `Σ A_k rho A_k†`.
pub fn apply_channel(kraus: &KrausSet, rho: &DensityOperator) -> Result<DensityOperator> {
    let d = kraus.dim();
    if rho.dim() != d {
        return Err(Error::dims(d, rho.dim()));
    }
    let emb = Embedding {
        which: 0,
        d_b: 1,
        d_env: 1,
    };
    Ok(DensityOperator::from_trusted(conjugate_sum(
        kraus,
        rho.matrix(),
        emb,
    )))
}

fn subsystem_embedding(
    kraus: &KrausSet,
    total: usize,
    subsystem: usize,
    dims: (usize, usize),
) -> Result<Embedding> {
    let (d_a, d_b) = dims;
    if d_a * d_b != total {
        return Err(Error::dims(total, d_a * d_b));
    }
    let (local, env) = match subsystem {
        0 => (d_a, d_b),
        1 => (d_b, d_a),
        other => {
            return Err(Error::InvalidParameter(format!(
                "subsystem index {other} out of range for a bipartite system"
            )))
        }
    };
    if kraus.dim() != local {
        return Err(Error::dims(local, kraus.dim()));
    }
    Ok(Embedding {
        which: subsystem,
        d_b,
        d_env: env,
    })
}

/// `(L ⊗ I) rho` (subsystem 0) or `(I ⊗ L) rho` (subsystem 1) on a
/// bipartite system with local dimensions `dims`.
pub fn apply_on_subsystem(
    kraus: &KrausSet,
    rho: &DensityOperator,
    subsystem: usize,
    dims: (usize, usize),
) -> Result<DensityOperator> {
    let emb = subsystem_embedding(kraus, rho.dim(), subsystem, dims)?;
    Ok(DensityOperator::from_trusted(conjugate_sum(
        kraus,
        rho.matrix(),
        emb,
    )))
}

/// Same as [`apply_on_subsystem`] for a pure input `|psi><psi|`:
/// accumulates `Σ_k v_k v_k†` with `v_k = (A_k ⊗ I)|psi>`, which avoids
/// dense conjugation on large product spaces.
pub fn apply_on_subsystem_pure(
    kraus: &KrausSet,
    psi: &ComplexVector,
    subsystem: usize,
    dims: (usize, usize),
) -> Result<DensityOperator> {
    let d = psi.len();
    let emb = subsystem_embedding(kraus, d, subsystem, dims)?;
    let norm = psi.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state vector norm is {norm}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut acc = ComplexMatrix::zeros(d, d);
    let mut v = ComplexVector::zeros(d);
    for a in &kraus.operators {
        v.fill(ZERO);
        for (row, col, w) in nonzeros(a) {
            for e in 0..emb.d_env {
                v[emb.index(row, e)] += w * psi[emb.index(col, e)];
            }
        }
        acc.gerc(one, &v, &v, one);
    }
    Ok(DensityOperator::from_trusted(acc))
}

/// Channel description used in CLI configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ChannelSpec {
    Depolarizing {
        n: usize,
        p: f64,
    },
    Loss {
        #[serde(rename = "R")]
        r: f64,
    },
}

impl ChannelSpec {
    /// Kraus set acting on a system of dimension `dim` (Fock levels for loss).
    pub fn kraus(&self, dim: usize) -> Result<KrausSet> {
        match *self {
            ChannelSpec::Depolarizing { n, p } => {
                if n != dim {
                    return Err(Error::dims(dim, n));
                }
                Ok(DepolarizingChannel::new(n, p)?.kraus())
            }
            ChannelSpec::Loss { r } => Ok(loss_kraus(&LossChannel::from_loss(r)?, dim)),
        }
    }
}
