//! Random test inputs: Gaussian-ensemble states, densities and Schmidt vectors.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::states::{DensityOperator, SchmidtVector};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random normalized vector.
pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    let v = ComplexVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Random Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    (&g + g.adjoint()).scale(0.5)
}

/// Random density operator of the given rank (`G G† / tr`, with `G` a
/// `dim × rank` Gaussian matrix).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityOperator {
    let g = ComplexMatrix::from_fn(dim, rank.clamp(1, dim), |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(m.unscale(tr)).expect("Gram matrix is a valid density operator")
}

/// Uniformly random point on the probability simplex.
pub fn random_schmidt<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SchmidtVector {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let mut coeffs: Vec<f64> = w.iter().map(|x| x / total).collect();
    // absorb rounding so the sum is 1 to machine precision
    let drift = 1.0 - coeffs.iter().sum::<f64>();
    coeffs[0] += drift;
    SchmidtVector::new(coeffs).expect("normalized weights")
}
