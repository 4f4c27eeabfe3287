//! Closed-form detection probabilities against the numerical
//! states → channel → optimal-filter pipeline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{apply_on_subsystem, depolarize, DepolarizingChannel};
use crate::error::Result;
use crate::filtering::optimal_filter;
use crate::linalg::DEFAULT_REL_TOL;
use crate::random::{random_schmidt, random_vector};
use crate::sensing::formulas::*;
use crate::sensing::FockOracle;
use crate::states::{schmidt_entangled_qudit, DensityOperator, PowerBudget, Truncation};

/// Loss values of the grid: 0.05, 0.15, ..., 0.95.
pub fn loss_grid() -> Vec<f64> {
    (0..10).map(|k| 0.05 + 0.1 * k as f64).collect()
}

/// Mean photon numbers of the grid.
pub const PHOTON_GRID: [f64; 3] = [0.25, 1.0, 4.0];
/// Squeezing ratios `m_bar / <n>` used for displaced squeezed probes.
pub const SQUEEZE_RATIOS: [f64; 3] = [0.2, 0.5, 0.9];
/// Non-aligned `(θ, φ)` pairs checked against the general-phase formula.
pub const PHASE_PAIRS: [(f64, f64); 2] = [(0.3, 1.0), (1.2, -0.4)];
/// Grid points whose squeezing parameter exceeds this are skipped.
pub const MAX_SQUEEZING: f64 = 1.0;

pub const LOSS_TOLERANCE: f64 = 1e-6;
pub const DEPOL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosscheckConfig {
    pub truncation: Truncation,
    pub rel_tol: f64,
    pub seed: u64,
    /// Random probe states per dimension in the depolarizing blocks.
    pub states_per_dim: usize,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        CrosscheckConfig {
            truncation: Truncation::default(),
            rel_tol: DEFAULT_REL_TOL,
            seed: 0,
            states_per_dim: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub name: &'static str,
    pub points: usize,
    pub max_abs: f64,
    pub tolerance: f64,
}

impl Deviation {
    pub fn passed(&self) -> bool {
        self.max_abs <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub entries: Vec<Deviation>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(Deviation::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Deviation> {
        self.entries.iter().find(|d| d.name == name)
    }
}

fn compare<T: Sync>(
    name: &'static str,
    tolerance: f64,
    points: &[T],
    eval: impl Fn(&T) -> Result<(f64, f64)> + Sync,
) -> Result<Deviation> {
    let diffs = points
        .par_iter()
        .map(|p| eval(p).map(|(a, b)| (a - b).abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Deviation {
        name,
        points: diffs.len(),
        max_abs: diffs.into_iter().fold(0.0, f64::max),
        tolerance,
    })
}

fn squeezing_ok(m_bar: f64) -> bool {
    m_bar.sqrt().asinh() <= MAX_SQUEEZING + 1e-12
}

/// Every loss formula on the photon/loss grid against the Fock pipeline.
pub fn loss_block(config: &CrosscheckConfig) -> Result<Vec<Deviation>> {
    let oracle = FockOracle::new(config.truncation, config.rel_tol);
    let losses = loss_grid();
    let grid = |ns: Vec<f64>| -> Vec<(f64, f64)> {
        ns.iter()
            .flat_map(|&n| losses.iter().map(move |&r| (n, r)))
            .collect()
    };
    let all_n = PHOTON_GRID.to_vec();
    let squeezable: Vec<f64> = PHOTON_GRID
        .iter()
        .copied()
        .filter(|&n| squeezing_ok(n))
        .collect();

    let budgets: Vec<PowerBudget> = PHOTON_GRID
        .iter()
        .flat_map(|&n| {
            SQUEEZE_RATIOS
                .iter()
                .map(move |&q| PowerBudget::from_ratio(n, q))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|b| squeezing_ok(b.m_bar()))
        .collect();
    let budget_grid: Vec<(PowerBudget, f64)> = budgets
        .iter()
        .flat_map(|&b| losses.iter().map(move |&r| (b, r)))
        .collect();
    let phase_grid: Vec<(PowerBudget, (f64, f64), f64)> = budget_grid
        .iter()
        .flat_map(|&(b, r)| PHASE_PAIRS.iter().map(move |&ph| (b, ph, r)))
        .collect();

    Ok(vec![
        compare("coherent", LOSS_TOLERANCE, &grid(all_n), |&(n, r)| {
            Ok((p_loss_coherent(n, r), oracle.coherent(n, r)?))
        })?,
        compare("squeezed", LOSS_TOLERANCE, &budget_grid, |(b, r)| {
            Ok((
                p_loss_squeezed_aligned(b, *r),
                oracle.squeezed(b, 0.0, 0.0, *r)?,
            ))
        })?,
        compare(
            "squeezed_phase",
            LOSS_TOLERANCE,
            &phase_grid,
            |(b, (th, ph), r)| {
                Ok((
                    p_loss_squeezed(b, *th, *ph, *r),
                    oracle.squeezed(b, *th, *ph, *r)?,
                ))
            },
        )?,
        compare(
            "squeezed_vacuum",
            LOSS_TOLERANCE,
            &grid(squeezable.clone()),
            |&(n, r)| Ok((p_loss_sv(n, r), oracle.squeezed_vacuum(n, r)?)),
        )?,
        compare(
            "tmsv_optimal",
            LOSS_TOLERANCE,
            &grid(squeezable.clone()),
            |&(n, r)| Ok((p_loss_tmsv(n, r), oracle.tmsv_optimal(n, r)?)),
        )?,
        compare(
            "tmsv_photodiff",
            LOSS_TOLERANCE,
            &grid(squeezable),
            |&(n, r)| Ok((p_loss_tmsv_photodiff(n, r), oracle.tmsv_photodiff(n, r)?)),
        )?,
    ])
}

fn depol_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// Depolarization of random pure qudit probes, `n` in 2..=5.
pub fn depolarizing_block(config: &CrosscheckConfig) -> Result<Deviation> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::new();
    for n in 2..=5 {
        for _ in 0..config.states_per_dim {
            let psi = random_vector(n, &mut rng);
            for p in depol_grid() {
                points.push((n, psi.clone(), p));
            }
        }
    }
    compare("depolarizing", DEPOL_TOLERANCE, &points, |(n, psi, p)| {
        let rho1 = DensityOperator::from_pure(psi)?;
        let rho0 = depolarize(&rho1, &DepolarizingChannel::new(*n, *p)?)?;
        let numeric = optimal_filter(&rho0, &rho1, config.rel_tol)?.detection_probability;
        Ok((p_depol(*n, *p)?, numeric))
    })
}

/// Depolarization of one arm of random Schmidt states, `n` in 2..=4.
pub fn entangled_block(config: &CrosscheckConfig) -> Result<Deviation> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut points = Vec::new();
    for n in 2..=4 {
        for _ in 0..config.states_per_dim {
            let lambdas = random_schmidt(n, &mut rng);
            for p in depol_grid() {
                points.push((n, lambdas.clone(), p));
            }
        }
    }
    compare(
        "depolarizing_entangled",
        DEPOL_TOLERANCE,
        &points,
        |(n, lambdas, p)| {
            let probe = schmidt_entangled_qudit(lambdas, *n)?;
            let rho1 = probe.density();
            let kraus = DepolarizingChannel::new(*n, *p)?.kraus();
            let rho0 = apply_on_subsystem(&kraus, &rho1, 0, (*n, *n))?;
            let numeric = optimal_filter(&rho0, &rho1, config.rel_tol)?.detection_probability;
            Ok((p_depol_entangled(lambdas, *p), numeric))
        },
    )
}

pub fn run(config: &CrosscheckConfig) -> Result<CrosscheckReport> {
    let mut entries = vec![depolarizing_block(config)?, entangled_block(config)?];
    entries.extend(loss_block(config)?);
    Ok(CrosscheckReport { entries })
}
