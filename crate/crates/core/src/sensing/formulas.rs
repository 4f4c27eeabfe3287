//! Closed-form detection probabilities of optimally filtered probes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{PowerBudget, SchmidtVector};

/// Depolarization of an `n`-level pure probe: `(n - 1) p / n`, independent
/// of the probe state.
pub fn p_depol(n: usize, p: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok((n as f64 - 1.0) * p / n as f64)
}

/// Depolarization of one arm of `Σ sqrt(λ_k) |k>|k>`:
/// `(1 - Σ λ_k² / n) p`.
pub fn p_depol_entangled(lambdas: &SchmidtVector, p: f64) -> f64 {
    let n = lambdas.len() as f64;
    let purity: f64 = lambdas.coefficients().iter().map(|l| l * l).sum();
    (1.0 - purity / n) * p
}

/// Coherent probe of mean photon number `n_bar`.
pub fn p_loss_coherent(n_bar: f64, r: f64) -> f64 {
    let shrink = 1.0 - (1.0 - r).sqrt();
    -(-(shrink * shrink * n_bar)).exp_m1()
}

/// Displaced squeezed probe `D(α) S(ζ)|0>` with `|α|² = n_bar`,
/// `sinh² r = m_bar`, squeezing phase `theta` and displacement phase `phi`.
pub fn p_loss_squeezed(budget: &PowerBudget, theta: f64, phi: f64, r: f64) -> f64 {
    let sq = budget.squeezing();
    let mu = sq.cosh();
    let nu = Complex64::from_polar(sq.sinh(), theta);
    let alpha = Complex64::from_polar(budget.n_bar().sqrt(), phi);
    let nu2 = nu.norm_sqr();
    let spread = 1.0 + nu2 * r * (2.0 - r);
    let shrink = 1.0 - (1.0 - r).sqrt();
    let cross = 0.5 * mu * (nu.conj() * alpha * alpha + nu * alpha.conj() * alpha.conj()).re;
    let a2 = alpha.norm_sqr();
    let exponent = shrink * shrink / spread * (a2 + (2.0 - r) * (nu2 * a2 + cross));
    1.0 - (-exponent).exp() / spread.sqrt()
}

/// Amplitude-squeezed probe (`2φ - θ = 0`, taken as `θ = φ = 0`).
pub fn p_loss_squeezed_aligned(budget: &PowerBudget, r: f64) -> f64 {
    let sq = budget.squeezing();
    let s = sq.sinh();
    let spread = 1.0 + s * s * r * (2.0 - r);
    let shrink = 1.0 - (1.0 - r).sqrt();
    let exponent =
        shrink * shrink / spread * (1.0 - (-sq).exp() * s * r) * (2.0 * sq).exp() * budget.n_bar();
    1.0 - (-exponent).exp() / spread.sqrt()
}

/// Squeezed vacuum of mean photon number `n_mean`.
pub fn p_loss_sv(n_mean: f64, r: f64) -> f64 {
    1.0 - 1.0 / (1.0 + n_mean * r * (2.0 - r)).sqrt()
}

fn lambda_sq(n_mean: f64) -> f64 {
    n_mean / (1.0 + n_mean)
}

/// Two-mode squeezed vacuum with one arm through the channel and a joint
/// measurement of both output modes.
pub fn p_loss_tmsv(n_mean: f64, r: f64) -> f64 {
    let l2 = lambda_sq(n_mean);
    let ratio = (1.0 - l2) / (1.0 - l2 * (1.0 - r).sqrt());
    1.0 - ratio * ratio
}

/// Two-mode squeezed vacuum read out by the photon-number difference.
pub fn p_loss_tmsv_photodiff(n_mean: f64, r: f64) -> f64 {
    let l2 = lambda_sq(n_mean);
    1.0 - (1.0 - l2) / (1.0 - l2 * (1.0 - r))
}
