//! Minimum detectable loss, minimum probe power and the squeezing power split.

use crate::error::{Error, Result};
use crate::states::PowerBudget;

use super::formulas::{
    p_loss_coherent, p_loss_squeezed, p_loss_squeezed_aligned, p_loss_sv, p_loss_tmsv,
    p_loss_tmsv_photodiff,
};

/// Bisection cap on `[0, 1]`.
pub const BISECTION_MAX_ITER: usize = 200;
/// Golden-section stopping width relative to the total photon number.
pub const SPLIT_REL_TOL: f64 = 1e-6;
/// Points in the coarse scan that brackets the golden-section search.
pub const SPLIT_SCAN_POINTS: usize = 64;

/// Detection-probability threshold defining `R_M`; strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AcceptanceProbability(f64);

impl AcceptanceProbability {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "acceptance probability must lie in (0, 1), got {value}"
            )));
        }
        Ok(AcceptanceProbability(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// `ln(1 / (1 - P_ac))`.
    fn log_inv(&self) -> f64 {
        -(-self.0).ln_1p()
    }
}

impl Default for AcceptanceProbability {
    fn default() -> Self {
        AcceptanceProbability(0.5)
    }
}

/// Probe families with a fixed photon budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    Coherent {
        n_total: f64,
    },
    /// `D(α) S(ζ)|0>` with `ζ = r e^{iθ}`, `α = |α| e^{iφ}`.
    Squeezed {
        budget: PowerBudget,
        theta: f64,
        phi: f64,
    },
    SqueezedVacuum {
        n_total: f64,
    },
    /// Two-mode squeezed vacuum, joint projective readout.
    TmsvOptimal {
        n_total: f64,
    },
    /// Two-mode squeezed vacuum, photon-number-difference readout.
    TmsvPhotodiff {
        n_total: f64,
    },
}

/// Probe families for which a minimum power is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Coherent,
    SqueezedVacuum,
    TmsvOptimal,
    TmsvPhotodiff,
    /// Displaced squeezed state with the photon split chosen optimally.
    OptimizedSqueezed,
}

impl Probe {
    /// Mean photon number sent through the channel.
    pub fn n_total(&self) -> f64 {
        match *self {
            Probe::Coherent { n_total }
            | Probe::SqueezedVacuum { n_total }
            | Probe::TmsvOptimal { n_total }
            | Probe::TmsvPhotodiff { n_total } => n_total,
            Probe::Squeezed { budget, .. } => budget.n_total(),
        }
    }

    /// Detection probability at loss `r`.
    pub fn detection_probability(&self, r: f64) -> f64 {
        match *self {
            Probe::Coherent { n_total } => p_loss_coherent(n_total, r),
            Probe::Squeezed { budget, theta, phi } => {
                if theta == 0.0 && phi == 0.0 {
                    p_loss_squeezed_aligned(&budget, r)
                } else {
                    p_loss_squeezed(&budget, theta, phi, r)
                }
            }
            Probe::SqueezedVacuum { n_total } => p_loss_sv(n_total, r),
            Probe::TmsvOptimal { n_total } => p_loss_tmsv(n_total, r),
            Probe::TmsvPhotodiff { n_total } => p_loss_tmsv_photodiff(n_total, r),
        }
    }

    /// Same family and phases, different total photon number.
    fn rescaled(&self, n_total: f64) -> Probe {
        match *self {
            Probe::Coherent { .. } => Probe::Coherent { n_total },
            Probe::SqueezedVacuum { .. } => Probe::SqueezedVacuum { n_total },
            Probe::TmsvOptimal { .. } => Probe::TmsvOptimal { n_total },
            Probe::TmsvPhotodiff { .. } => Probe::TmsvPhotodiff { n_total },
            Probe::Squeezed { budget, theta, phi } => {
                let ratio = if budget.n_total() > 0.0 {
                    budget.m_bar() / budget.n_total()
                } else {
                    0.0
                };
                Probe::Squeezed {
                    budget: PowerBudget::from_ratio(n_total, ratio)
                        .expect("ratio taken from a valid budget"),
                    theta,
                    phi,
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_total();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "probe photon number must be positive and finite, got {n}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingResult {
    /// Minimum detectable loss.
    pub r_m: f64,
    /// Minimum mean photon number for which `r_m <= 1` exists.
    pub n_min: f64,
    /// Detection probability evaluated at `r_m`.
    pub p_at_r: Option<f64>,
}

/// Smallest `x` in `[0, 1]` with `f(x) >= target`, for nondecreasing `f`
/// with `f(0) < target <= f(1)`. Bisects to floating-point resolution (at
/// most [`BISECTION_MAX_ITER`] halvings).
pub fn bisect_unit(f: impl Fn(f64) -> f64, target: f64) -> Option<f64> {
    if f(1.0) < target {
        return None;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let pick = if (f(lo) - target).abs() < (f(hi) - target).abs() {
        lo
    } else {
        hi
    };
    Some(pick)
}

/// `R_M` by bisection on the probe's detection probability.
pub fn r_min_bisection(probe: &Probe, p_ac: AcceptanceProbability) -> Result<SensingResult> {
    probe.validate()?;
    match bisect_unit(|r| probe.detection_probability(r), p_ac.value()) {
        Some(r_m) => Ok(SensingResult {
            r_m,
            n_min: n_min_for(probe, p_ac),
            p_at_r: Some(probe.detection_probability(r_m)),
        }),
        None => Err(Error::InsufficientPower {
            n_min: n_min_for(probe, p_ac),
        }),
    }
}

/// Minimum detectable loss at acceptance probability `p_ac`.
///
/// Uses the closed forms for coherent, squeezed-vacuum and two-mode probes
/// and falls back to bisection for displaced squeezed states.
pub fn r_min(probe: &Probe, p_ac: AcceptanceProbability) -> Result<SensingResult> {
    probe.validate()?;
    let n = probe.n_total();
    let closed = match *probe {
        Probe::Coherent { .. } => {
            let x = (p_ac.log_inv() / n).sqrt();
            Some(x * (2.0 - x))
        }
        Probe::SqueezedVacuum { .. } => {
            let c = (1.0 / (1.0 - p_ac.value())).powi(2) - 1.0;
            let q = c / n;
            // 1 - sqrt(1 - q), written to avoid cancellation
            Some(q / (1.0 + (1.0 - q).sqrt()))
        }
        Probe::TmsvOptimal { .. } => {
            let x = (1.0 / (1.0 - p_ac.value()).sqrt() - 1.0) / n;
            Some(x * (2.0 - x))
        }
        Probe::TmsvPhotodiff { .. } => Some(p_ac.value() / (1.0 - p_ac.value()) / n),
        Probe::Squeezed { .. } => None,
    };
    let Some(r_m) = closed else {
        return r_min_bisection(probe, p_ac);
    };
    let n_min = n_min_for(probe, p_ac);
    if n < n_min || !(r_m <= 1.0) {
        return Err(Error::InsufficientPower { n_min });
    }
    Ok(SensingResult {
        r_m,
        n_min,
        p_at_r: Some(probe.detection_probability(r_m)),
    })
}

fn n_min_for(probe: &Probe, p_ac: AcceptanceProbability) -> f64 {
    match probe {
        Probe::Coherent { .. } => n_min(ProbeKind::Coherent, p_ac),
        Probe::SqueezedVacuum { .. } => n_min(ProbeKind::SqueezedVacuum, p_ac),
        Probe::TmsvOptimal { .. } => n_min(ProbeKind::TmsvOptimal, p_ac),
        Probe::TmsvPhotodiff { .. } => n_min(ProbeKind::TmsvPhotodiff, p_ac),
        Probe::Squeezed { .. } => n_min_by_bisection(probe, p_ac),
    }
}

/// Minimum mean photon number for which some loss `R <= 1` reaches `p_ac`.
pub fn n_min(kind: ProbeKind, p_ac: AcceptanceProbability) -> f64 {
    let p = p_ac.value();
    match kind {
        ProbeKind::Coherent => p_ac.log_inv(),
        ProbeKind::SqueezedVacuum => (1.0 / (1.0 - p)).powi(2) - 1.0,
        ProbeKind::TmsvOptimal => 1.0 / (1.0 - p).sqrt() - 1.0,
        ProbeKind::TmsvPhotodiff => p / (1.0 - p),
        ProbeKind::OptimizedSqueezed => n_min_optimized_squeezed(p_ac),
    }
}

/// Threshold photon number found by bisection on `P(R = 1) >= p_ac` for the
/// probe family of `probe` (same phases and squeezing ratio).
pub fn n_min_by_bisection(probe: &Probe, p_ac: AcceptanceProbability) -> f64 {
    threshold_photons(
        |n| probe.rescaled(n).detection_probability(1.0),
        p_ac.value(),
    )
}

/// Smallest `n >= 0` with `g(n) >= target` for nondecreasing `g`.
fn threshold_photons(g: impl Fn(f64) -> f64, target: f64) -> f64 {
    let mut hi = 1.0;
    while g(hi) < target {
        hi *= 2.0;
        if hi > 1e15 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Minimizes `f` over `[a, b]`: coarse scan of [`SPLIT_SCAN_POINTS`] points,
/// then golden-section search in the bracket around the best scan point.
/// Returns `(x, f(x))`.
fn scan_then_golden(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let k = SPLIT_SCAN_POINTS - 1;
    let grid: Vec<f64> = (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = (0..=k)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    if !values[best].is_finite() {
        return (grid[best], values[best]);
    }
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(k)];

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if fx <= values[best] {
        (x, fx)
    } else {
        (grid[best], values[best])
    }
}

/// `R_M` of an amplitude-squeezed probe with `m_bar` squeezing photons out of
/// `n_total`, or infinity if that split cannot reach `p_ac`.
fn split_r_min(n_total: f64, m_bar: f64, p_ac: AcceptanceProbability) -> f64 {
    let m_bar = m_bar.clamp(0.0, n_total);
    let budget = match PowerBudget::new((n_total - m_bar).max(0.0), m_bar) {
        Ok(b) => b,
        Err(_) => return f64::INFINITY,
    };
    bisect_unit(|r| p_loss_squeezed_aligned(&budget, r), p_ac.value()).unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    /// Photons spent on squeezing.
    pub m_bar: f64,
    /// Minimum detectable loss at that split.
    pub r_m: f64,
}

/// Best division of `n_total` photons between displacement and amplitude
/// squeezing, minimizing `R_M`.
pub fn optimize_power_split(n_total: f64, p_ac: AcceptanceProbability) -> Result<PowerSplit> {
    if !(n_total > 0.0) || !n_total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "photon number must be positive and finite, got {n_total}"
        )));
    }
    let (m_bar, r_m) = scan_then_golden(
        |m| split_r_min(n_total, m, p_ac),
        0.0,
        n_total,
        SPLIT_REL_TOL * n_total,
    );
    if !r_m.is_finite() {
        return Err(Error::InsufficientPower {
            n_min: n_min_optimized_squeezed(p_ac),
        });
    }
    Ok(PowerSplit { m_bar, r_m })
}

/// Largest detection probability at full loss over all splits of `n_total`.
fn best_full_loss_probability(n_total: f64) -> f64 {
    let (_, neg) = scan_then_golden(
        |m| {
            let budget = PowerBudget::new((n_total - m).max(0.0), m.clamp(0.0, n_total))
                .expect("nonnegative split");
            -p_loss_squeezed_aligned(&budget, 1.0)
        },
        0.0,
        n_total,
        1e-12 * n_total.max(1.0),
    );
    -neg
}

/// Minimum power of the optimally split displaced squeezed probe.
pub fn n_min_optimized_squeezed(p_ac: AcceptanceProbability) -> f64 {
    threshold_photons(best_full_loss_probability, p_ac.value())
}

/// Large-power approximations of `R_M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptotic {
    /// Squeezed vacuum with `n_mean >> 1`.
    SqueezedVacuumLargeN { n_mean: f64 },
    /// Bright amplitude-squeezed probe with `n_bar >> m_bar`.
    BrightSqueezed { n_bar: f64, r: f64 },
}

pub fn approx_r_min(kind: Asymptotic, p_ac: AcceptanceProbability) -> f64 {
    match kind {
        Asymptotic::SqueezedVacuumLargeN { n_mean } => {
            ((1.0 / (1.0 - p_ac.value())).powi(2) - 1.0) / (2.0 * n_mean)
        }
        Asymptotic::BrightSqueezed { n_bar, r } => {
            let x = p_ac.log_inv().sqrt() / (r.exp() * n_bar.sqrt());
            x * (2.0 - x)
        }
    }
}
