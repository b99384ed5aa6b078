use std::path::{Path, PathBuf};

use serde::Deserialize;
use solimbt::balancing::{BalancingFormula, OrderSpec};
use solimbt::gramians::GramianSolver;
use solimbt::lyapunov::SignOptions;
use solimbt::matfun::{FrequencyBand, TimeWindow};
use solimbt::pipeline::{
    log_spaced_points, FrequencyUnit, HybridConfig, Method, RealizationChoice, ReductionConfig,
    DEFAULT_PREREDUCE_TOL,
};
use solimbt::system::JChoice;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    #[serde(default)]
    pub unit: FrequencyUnit,
    pub intervals: Vec<[f64; 2]>,
}

impl BandSpec {
    pub fn to_band(&self) -> Result<FrequencyBand, CliError> {
        let intervals = self
            .intervals
            .iter()
            .map(|[a, b]| (self.unit.to_rad_s(*a), self.unit.to_rad_s(*b)))
            .collect();
        FrequencyBand::new(intervals).map_err(|e| CliError::config(format!("band: {e}")))
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub t0: f64,
    pub tf: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridSpec {
    pub points: usize,
    pub fmin: f64,
    pub fmax: f64,
    #[serde(default)]
    pub unit: FrequencyUnit,
    #[serde(default = "default_hybrid_tol")]
    pub tol: f64,
}

fn default_hybrid_tol() -> f64 {
    DEFAULT_PREREDUCE_TOL
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RealizationName {
    #[default]
    Companion,
    StrictlyDissipative,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum JName {
    #[default]
    Identity,
    NegativeStiffness,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    #[default]
    DenseSign,
    Projection,
}

/// Reduction job read from JSON. Relative paths are taken relative to the
/// file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub name: Option<String>,
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub method: Method,
    #[serde(default)]
    pub formula: BalancingFormula,
    pub band: Option<BandSpec>,
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub realization: RealizationName,
    pub gamma: Option<f64>,
    #[serde(default)]
    pub j: JName,
    #[serde(default)]
    pub solver: SolverName,
    /// Relative trace change that stops the projection solver.
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default)]
    pub modified: bool,
    pub hybrid: Option<HybridSpec>,
    #[serde(default)]
    pub order: OrderSpec,
}

fn default_solver_tol() -> f64 {
    1e-10
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        let mut config: JobConfig =
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.input_dir = base.join(&config.input_dir);
        config.output_dir = base.join(&config.output_dir);
        config.validate()?;
        Ok(config)
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| "rom".into())
    }

    fn validate(&self) -> Result<(), CliError> {
        match self.method {
            Method::Flbt if self.band.is_none() => {
                return Err(CliError::config("missing key 'band' (required for method flbt)"));
            }
            Method::Tlbt if self.window.is_none() => {
                return Err(CliError::config("missing key 'window' (required for method tlbt)"));
            }
            _ => {}
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(CliError::config(format!("key 'alpha' must be non-negative, got {}", self.alpha)));
        }
        if self.gamma.is_some() && self.realization != RealizationName::StrictlyDissipative {
            return Err(CliError::config(
                "key 'gamma' needs \"realization\": \"strictly_dissipative\"",
            ));
        }
        if !(self.solver_tol > 0.0) {
            return Err(CliError::config("key 'solver_tol' must be positive"));
        }
        match self.order {
            OrderSpec::Tol(t) if !(t > 0.0) => return Err(CliError::config("key 'order.tol' must be positive")),
            OrderSpec::Fixed(0) => return Err(CliError::config("key 'order.fixed' must be at least 1")),
            _ => {}
        }
        if let Some(h) = &self.hybrid {
            if h.points == 0 || !(h.fmin > 0.0 && h.fmax > h.fmin) || !(h.tol > 0.0) {
                return Err(CliError::config(
                    "key 'hybrid' needs points >= 1, 0 < fmin < fmax and tol > 0",
                ));
            }
        }
        Ok(())
    }

    pub fn reduction(&self) -> Result<ReductionConfig, CliError> {
        let band = self.band.as_ref().map(BandSpec::to_band).transpose()?;
        let window = self
            .window
            .map(|w| TimeWindow::new(w.t0, w.tf).map_err(|e| CliError::config(format!("window: {e}"))))
            .transpose()?;
        let realization = match self.realization {
            RealizationName::Companion => RealizationChoice::Companion(match self.j {
                JName::Identity => JChoice::Identity,
                JName::NegativeStiffness => JChoice::NegativeStiffness,
            }),
            RealizationName::StrictlyDissipative => RealizationChoice::StrictlyDissipative { gamma: self.gamma },
        };
        let solver = match self.solver {
            SolverName::DenseSign => GramianSolver::DenseSign(SignOptions::default()),
            SolverName::Projection => GramianSolver::Projection {
                shifts: None,
                tol: self.solver_tol,
            },
        };
        let hybrid = self.hybrid.as_ref().map(|h| HybridConfig {
            points: log_spaced_points(h.unit.to_rad_s(h.fmin), h.unit.to_rad_s(h.fmax), h.points),
            tol: h.tol,
        });
        Ok(ReductionConfig {
            method: self.method,
            formula: self.formula,
            band,
            window,
            alpha: self.alpha,
            realization,
            solver,
            modified: self.modified,
            hybrid,
            order: self.order,
        })
    }
}
