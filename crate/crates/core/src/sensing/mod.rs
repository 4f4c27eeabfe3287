//! Detection of depolarization and linear loss with optimally filtered
//! probes: closed-form detection probabilities, minimum detectable loss,
//! minimum probe power, and a truncated Fock-space numerical counterpart.
//!
//! Note on scaling: `R_M` of the squeezed vacuum and of the optimally split
//! squeezed probe both fall off as `1 / <n>` at large power.

pub mod fock;
pub mod formulas;
pub mod threshold;

pub use fock::FockOracle;
pub use formulas::{
    p_depol, p_depol_entangled, p_loss_coherent, p_loss_squeezed, p_loss_squeezed_aligned,
    p_loss_sv, p_loss_tmsv, p_loss_tmsv_photodiff,
};
pub use threshold::{
    approx_r_min, bisect_unit, n_min, n_min_by_bisection, n_min_optimized_squeezed,
    optimize_power_split, r_min, r_min_bisection, AcceptanceProbability, Asymptotic, PowerSplit,
    Probe, ProbeKind, SensingResult,
};
