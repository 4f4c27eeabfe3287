use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use qfilter::channels::{apply_channel, ChannelSpec};
use qfilter::crosscheck::{self, CrosscheckConfig, CrosscheckReport};
use qfilter::filtering::{optimal_multifilter, simulate_outcomes, FilterReport};
use qfilter::linalg::{ComplexMatrix, MatrixJson};
use qfilter::states::{
    coherent_state, schmidt_entangled_qudit, squeezed_coherent_state, tmsv_state, DensityOperator,
    SchmidtVector,
};

use crate::config::RunConfig;
use crate::{CliError, CliResult};

pub fn run_crosscheck(cfg: &RunConfig) -> CliResult<CrosscheckReport> {
    let config = CrosscheckConfig {
        truncation: cfg.truncation,
        rel_tol: cfg.rel_tol,
        seed: cfg.seed,
        ..CrosscheckConfig::default()
    };
    Ok(crosscheck::run(&config)?)
}

pub fn render_crosscheck(report: &CrosscheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:>6} {:>12} {:>10}  status",
        "formula", "points", "max_abs_dev", "tolerance"
    );
    for d in &report.entries {
        let status = if d.passed() { "ok" } else { "FAIL" };
        let _ = writeln!(
            s,
            "{:<24} {:>6} {:>12.3e} {:>10.0e}  {status}",
            d.name, d.points, d.max_abs, d.tolerance
        );
    }
    s
}

/// Reads a density operator in the JSON matrix format.
pub fn read_state(path: &Path) -> CliResult<DensityOperator> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let json: MatrixJson = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    DensityOperator::from_json(&json)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Inline JSON (starting with `{`) or a path to a JSON file.
pub fn parse_channel(arg: &str) -> CliResult<ChannelSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("channel spec: {e}")))
}

#[derive(Debug, Clone, Default)]
pub struct FilterInput {
    pub rho0: Option<PathBuf>,
    pub rho1: Vec<PathBuf>,
    pub simulate: Option<u64>,
}

/// Optimal filter detecting `rho0` against the `rho1` set. Without an
/// explicit `rho0`, the configured channel is applied to the single `rho1`.
pub fn run_filter(cfg: &RunConfig, input: &FilterInput) -> CliResult<FilterReport> {
    if input.rho1.is_empty() {
        return Err(CliError::Input(
            "at least one --rho1 state is required".into(),
        ));
    }
    let others = input
        .rho1
        .iter()
        .map(|p| read_state(p))
        .collect::<CliResult<Vec<_>>>()?;
    let rho0 = match (&input.rho0, cfg.channel) {
        (Some(_), Some(_)) => {
            return Err(CliError::Input(
                "give either --rho0 or a channel, not both".into(),
            ))
        }
        (Some(path), None) => read_state(path)?,
        (None, Some(spec)) => {
            if others.len() != 1 {
                return Err(CliError::Input(
                    "a channel needs exactly one --rho1 probe state".into(),
                ));
            }
            apply_channel(&spec.kraus(others[0].dim())?, &others[0])?
        }
        (None, None) => return Err(CliError::Input("need --rho0 or a channel spec".into())),
    };
    let result = optimal_multifilter(&rho0, &others, cfg.rel_tol)?;
    let mut report = result.to_report();
    if let Some(trials) = input.simulate {
        report.outcome_counts = Some(simulate_outcomes(&result.povm, &rho0, trials, cfg.seed)?);
    }
    Ok(report)
}

/// States the `state` command can export.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Coherent {
        alpha: Complex64,
    },
    /// `D(α) S(ζ)|0>`.
    Squeezed {
        alpha: Complex64,
        zeta: Complex64,
    },
    Tmsv {
        n_mean: f64,
    },
    /// `Σ_k sqrt(λ_k) |k>|k>` on two qudits.
    Schmidt {
        lambdas: Vec<f64>,
    },
    Basis {
        dim: usize,
        index: usize,
    },
    MaximallyMixed {
        dim: usize,
    },
}

/// Density matrix of `spec`. Bosonic states use `levels` Fock levels when
/// given (per mode), otherwise the smallest count meeting the bound.
pub fn export_state(
    cfg: &RunConfig,
    spec: &StateSpec,
    levels: Option<usize>,
) -> CliResult<MatrixJson> {
    let t = cfg.truncation;
    let pure = match (spec, levels) {
        (StateSpec::Coherent { alpha }, None) => t.coherent(*alpha)?,
        (StateSpec::Coherent { alpha }, Some(n)) => coherent_state(*alpha, n, t.bound)?,
        (StateSpec::Squeezed { alpha, zeta }, None) => t.squeezed_coherent(*alpha, *zeta)?,
        (StateSpec::Squeezed { alpha, zeta }, Some(n)) => {
            squeezed_coherent_state(*alpha, *zeta, n, t.bound)?
        }
        (StateSpec::Tmsv { n_mean }, None) => t.tmsv(*n_mean)?,
        (StateSpec::Tmsv { n_mean }, Some(n)) => tmsv_state(*n_mean, n, t.bound)?,
        (StateSpec::Schmidt { lambdas }, _) => {
            let v = SchmidtVector::new(lambdas.clone())?;
            schmidt_entangled_qudit(&v, v.len())?
        }
        (StateSpec::Basis { dim, index }, _) => {
            return Ok(DensityOperator::basis(*dim, *index)?.to_json())
        }
        (StateSpec::MaximallyMixed { dim }, _) => {
            if *dim == 0 {
                return Err(CliError::Input("dimension must be positive".into()));
            }
            return Ok(MatrixJson::from(
                &ComplexMatrix::identity(*dim, *dim).unscale(*dim as f64),
            ));
        }
    };
    Ok(pure.to_json())
}
