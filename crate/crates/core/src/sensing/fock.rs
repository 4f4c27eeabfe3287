//! Truncated Fock-space evaluation of the loss-sensing detection
//! probabilities: build the probe, send it through the Kraus loss channel,
//! construct the optimal filter numerically and read off `tr[Π0 rho0]`.
//!
//! Shares no code with the closed forms in [`super::formulas`].

use num_complex::Complex64;

use crate::channels::{apply_channel, apply_on_subsystem_pure, loss_kraus, LossChannel};
use crate::error::Result;
use crate::filtering::{false_alarm, optimal_filter, pure_filter, Povm};
use crate::linalg::{Projector, DEFAULT_REL_TOL};
use crate::states::{PowerBudget, PureState, Truncation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockOracle {
    pub truncation: Truncation,
    pub rel_tol: f64,
}

impl Default for FockOracle {
    fn default() -> Self {
        FockOracle {
            truncation: Truncation::default(),
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

impl FockOracle {
    pub fn new(truncation: Truncation, rel_tol: f64) -> Self {
        FockOracle {
            truncation,
            rel_tol,
        }
    }

    /// Single-mode probe through loss `r`, filtered with the general
    /// mixed-state construction.
    fn single_mode(&self, probe: &PureState, r: f64) -> Result<f64> {
        let n = probe.dim();
        let kraus = loss_kraus(&LossChannel::from_loss(r)?, n);
        let rho1 = probe.density();
        let rho0 = apply_channel(&kraus, &rho1)?;
        Ok(optimal_filter(&rho0, &rho1, self.rel_tol)?.detection_probability)
    }

    pub fn coherent(&self, n_bar: f64, r: f64) -> Result<f64> {
        let probe = self
            .truncation
            .coherent(Complex64::new(n_bar.sqrt(), 0.0))?;
        self.single_mode(&probe, r)
    }

    /// Displaced squeezed probe `D(α) S(ζ)|0>`, `ζ = r_sq e^{iθ}`, `α = |α| e^{iφ}`.
    pub fn squeezed(&self, budget: &PowerBudget, theta: f64, phi: f64, r: f64) -> Result<f64> {
        let alpha = Complex64::from_polar(budget.n_bar().sqrt(), phi);
        let zeta = Complex64::from_polar(budget.squeezing(), theta);
        let probe = self.truncation.squeezed_coherent(alpha, zeta)?;
        self.single_mode(&probe, r)
    }

    pub fn squeezed_vacuum(&self, n_mean: f64, r: f64) -> Result<f64> {
        self.squeezed(&PowerBudget::new(0.0, n_mean)?, 0.0, 0.0, r)
    }

    /// Loss on mode 0 of a two-mode squeezed vacuum; returns the probe and
    /// the channel output.
    fn tmsv_output(
        &self,
        n_mean: f64,
        r: f64,
    ) -> Result<(PureState, crate::states::DensityOperator)> {
        let probe = self.truncation.tmsv(n_mean)?;
        let d = probe.modes()[0];
        let kraus = loss_kraus(&LossChannel::from_loss(r)?, d);
        let rho0 = apply_on_subsystem_pure(&kraus, probe.amplitudes(), 0, (d, d))?;
        Ok((probe, rho0))
    }

    /// Two-mode squeezed vacuum, optimal filter `Π0 = I - |Ψ><Ψ|`.
    pub fn tmsv_optimal(&self, n_mean: f64, r: f64) -> Result<f64> {
        let (probe, rho0) = self.tmsv_output(n_mean, r)?;
        Ok(pure_filter(probe.amplitudes(), &rho0)?.detection_probability)
    }

    /// Two-mode squeezed vacuum, rejecting on equal photon numbers:
    /// `Π1 = Σ_n |n>|n><n|<n|`.
    pub fn tmsv_photodiff(&self, n_mean: f64, r: f64) -> Result<f64> {
        let (probe, rho0) = self.tmsv_output(n_mean, r)?;
        let d = probe.modes()[0];
        let diagonal = Projector::diagonal(d * d, (0..d).map(|k| k * d + k))?;
        let povm = Povm::from_rejection(&diagonal);
        false_alarm(&povm, &rho0)
    }
}
