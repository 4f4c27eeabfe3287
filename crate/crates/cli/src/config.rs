use std::path::{Path, PathBuf};

use serde::Deserialize;

use qfilter::channels::ChannelSpec;
use qfilter::linalg::DEFAULT_REL_TOL;
use qfilter::sensing::AcceptanceProbability;
use qfilter::states::Truncation;

use crate::{CliError, CliResult};

pub const DEFAULT_N_MIN: f64 = 0.1;
pub const DEFAULT_N_MAX: f64 = 1000.0;
pub const DEFAULT_POINTS: usize = 60;

/// Settings that may come from a JSON config file or from flags.
/// Every field is optional; flags take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub command: Option<String>,
    pub p_ac: Option<f64>,
    pub n_min: Option<f64>,
    pub n_max: Option<f64>,
    pub points: Option<usize>,
    pub trunc_bound: Option<f64>,
    pub rel_tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub channel: Option<ChannelSpec>,
}

impl Settings {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overridden_by(self, flags: Settings) -> Settings {
        Settings {
            command: flags.command.or(self.command),
            p_ac: flags.p_ac.or(self.p_ac),
            n_min: flags.n_min.or(self.n_min),
            n_max: flags.n_max.or(self.n_max),
            points: flags.points.or(self.points),
            trunc_bound: flags.trunc_bound.or(self.trunc_bound),
            rel_tol: flags.rel_tol.or(self.rel_tol),
            seed: flags.seed.or(self.seed),
            out: flags.out.or(self.out),
            channel: flags.channel.or(self.channel),
        }
    }
}

/// Logarithmically spaced photon-number grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    min: f64,
    max: f64,
    points: usize,
}

impl LogGrid {
    pub fn new(min: f64, max: f64, points: usize) -> CliResult<Self> {
        if min.is_nan() || min <= 0.0 || !max.is_finite() || max < min {
            return Err(CliError::Input(format!(
                "grid needs 0 < nmin <= nmax, got [{min}, {max}]"
            )));
        }
        if points == 0 {
            return Err(CliError::Input("grid needs at least one point".into()));
        }
        Ok(LogGrid { min, max, points })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        let last = self.points - 1;
        (0..self.points)
            .map(|k| match k {
                0 => self.min,
                k if k == last => self.max,
                k => (a + (b - a) * k as f64 / last as f64).exp(),
            })
            .collect()
    }
}

impl Default for LogGrid {
    fn default() -> Self {
        LogGrid {
            min: DEFAULT_N_MIN,
            max: DEFAULT_N_MAX,
            points: DEFAULT_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p_ac: AcceptanceProbability,
    pub grid: LogGrid,
    pub truncation: Truncation,
    pub rel_tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub channel: Option<ChannelSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p_ac: AcceptanceProbability::default(),
            grid: LogGrid::default(),
            truncation: Truncation::default(),
            rel_tol: DEFAULT_REL_TOL,
            seed: 0,
            out: None,
            channel: None,
        }
    }
}

impl RunConfig {
    /// Validates merged settings for the subcommand `command`.
    pub fn resolve(settings: Settings, command: &str) -> CliResult<Self> {
        if let Some(c) = &settings.command {
            if c != command {
                return Err(CliError::Input(format!(
                    "config file is for command `{c}`, invoked `{command}`"
                )));
            }
        }
        let d = RunConfig::default();
        let p_ac = match settings.p_ac {
            Some(p) => AcceptanceProbability::new(p)?,
            None => d.p_ac,
        };
        let grid = LogGrid::new(
            settings.n_min.unwrap_or(DEFAULT_N_MIN),
            settings.n_max.unwrap_or(DEFAULT_N_MAX),
            settings.points.unwrap_or(DEFAULT_POINTS),
        )?;
        let truncation = match settings.trunc_bound {
            Some(b) if b > 0.0 && b < 1.0 => Truncation::with_bound(b),
            Some(b) => {
                return Err(CliError::Input(format!(
                    "truncation bound must lie in (0, 1), got {b}"
                )))
            }
            None => d.truncation,
        };
        let rel_tol = settings.rel_tol.unwrap_or(d.rel_tol);
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(CliError::Input(format!(
                "relative tolerance must lie in (0, 1), got {rel_tol}"
            )));
        }
        Ok(RunConfig {
            p_ac,
            grid,
            truncation,
            rel_tol,
            seed: settings.seed.unwrap_or(d.seed),
            out: settings.out,
            channel: settings.channel,
        })
    }
}
