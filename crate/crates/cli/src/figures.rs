//! Minimum-detectable-loss curves as tables over the photon-number grid.

use rayon::prelude::*;

use qfilter::sensing::{optimize_power_split, r_min, AcceptanceProbability, Probe};
use qfilter::states::PowerBudget;
use qfilter::Error;

use crate::config::RunConfig;
use crate::table::{Cell, Table};
use crate::CliResult;

/// Squeezing fractions `m_bar / <n>` of the displaced squeezed curves.
pub const FIG1_RATIOS: [f64; 4] = [0.0, 0.2, 0.9, 1.0];

fn r_m_cell(probe: &Probe, p_ac: AcceptanceProbability) -> CliResult<Cell> {
    match r_min(probe, p_ac) {
        Ok(res) => Ok(Cell::Value(res.r_m)),
        Err(Error::InsufficientPower { .. }) => Ok(Cell::Insufficient),
        Err(e) => Err(e.into()),
    }
}

/// Amplitude-squeezed probe with fraction `ratio` of the photons in
/// squeezing; the endpoints are the coherent and squeezed-vacuum probes.
pub fn fig1_probe(n_total: f64, ratio: f64) -> CliResult<Probe> {
    Ok(if ratio == 0.0 {
        Probe::Coherent { n_total }
    } else if ratio == 1.0 {
        Probe::SqueezedVacuum { n_total }
    } else {
        Probe::Squeezed {
            budget: PowerBudget::from_ratio(n_total, ratio)?,
            theta: 0.0,
            phi: 0.0,
        }
    })
}

/// Rows `(n_total, ratio, R_M)`, grid-major with ratios inner.
pub fn fig1(cfg: &RunConfig) -> CliResult<Table> {
    let points: Vec<(f64, f64)> = cfg
        .grid
        .values()
        .into_iter()
        .flat_map(|n| FIG1_RATIOS.iter().map(move |&q| (n, q)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(n, q)| {
            let cell = r_m_cell(&fig1_probe(n, q)?, cfg.p_ac)?;
            Ok(vec![Cell::Value(n), Cell::Value(q), cell])
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table {
        header: vec!["n_total", "ratio", "R_M"],
        rows,
    })
}

/// Rows `(n_total, m_bar_opt_ratio, R_M_opt, R_M_opt/R_M_sv)`.
pub fn fig2(cfg: &RunConfig) -> CliResult<Table> {
    let rows = cfg
        .grid
        .values()
        .par_iter()
        .map(|&n| {
            let (ratio, opt) = match optimize_power_split(n, cfg.p_ac) {
                Ok(split) => (Cell::Value(split.m_bar / n), Cell::Value(split.r_m)),
                Err(Error::InsufficientPower { .. }) => (Cell::Insufficient, Cell::Insufficient),
                Err(e) => return Err(e.into()),
            };
            let sv = r_m_cell(&Probe::SqueezedVacuum { n_total: n }, cfg.p_ac)?;
            let rel = match (opt.value(), sv.value()) {
                (Some(a), Some(b)) => Cell::Value(a / b),
                _ => Cell::Insufficient,
            };
            Ok(vec![Cell::Value(n), ratio, opt, rel])
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table {
        header: vec!["n_total", "m_bar_opt_ratio", "R_M_opt", "R_M_opt/R_M_sv"],
        rows,
    })
}

/// Rows `(n_total, coherent, sq_opt, sv, tmsv_opt, tmsv_photodiff)`.
pub fn fig3(cfg: &RunConfig) -> CliResult<Table> {
    let rows = cfg
        .grid
        .values()
        .par_iter()
        .map(|&n| {
            let sq_opt = match optimize_power_split(n, cfg.p_ac) {
                Ok(split) => Cell::Value(split.r_m),
                Err(Error::InsufficientPower { .. }) => Cell::Insufficient,
                Err(e) => return Err(e.into()),
            };
            Ok(vec![
                Cell::Value(n),
                r_m_cell(&Probe::Coherent { n_total: n }, cfg.p_ac)?,
                sq_opt,
                r_m_cell(&Probe::SqueezedVacuum { n_total: n }, cfg.p_ac)?,
                r_m_cell(&Probe::TmsvOptimal { n_total: n }, cfg.p_ac)?,
                r_m_cell(&Probe::TmsvPhotodiff { n_total: n }, cfg.p_ac)?,
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table {
        header: vec![
            "n_total",
            "coherent",
            "sq_opt",
            "sv",
            "tmsv_opt",
            "tmsv_photodiff",
        ],
        rows,
    })
}
