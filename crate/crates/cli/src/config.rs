use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use silevy::experiments::{Estimators, RegularityRun};
use silevy::indexing::{Domain, MetricKind, Point};
use silevy::integral::{DriftMode, Integrand};
use silevy::levy::LevyTriplet;
use silevy::measure::Measure;

use crate::CliError;

fn default_margin() -> u32 {
    3
}

fn default_js() -> Vec<u32> {
    (3..=10).collect()
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default = "default_js")]
    pub js: Vec<u32>,
    #[serde(default = "default_margin")]
    pub margin: u32,
    #[serde(default = "yes")]
    pub holder: bool,
    #[serde(default)]
    pub c_exp: bool,
    #[serde(default)]
    pub localized: bool,
    #[serde(default)]
    pub pc: bool,
    #[serde(default)]
    pub jump_bound: bool,
    /// Half-width of the acceptance band around the prediction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            js: default_js(),
            margin: default_margin(),
            holder: true,
            c_exp: false,
            localized: false,
            pc: false,
            jump_bound: false,
            tolerance: None,
        }
    }
}

/// An experiment as read from JSON. Every field is echoed into the output
/// metadata, which can be fed back in to repeat the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricKind>,
    pub triplet: LevyTriplet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrand: Option<Integrand>,
    #[serde(default)]
    pub drift: DriftMode,
    pub level: u32,
    pub eps: f64,
    #[serde(default)]
    pub targets: Vec<Vec<f64>>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default = "one")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Directory of stored paths to analyse instead of fresh simulations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<PathBuf>,
    /// Exponents of deterministic test functions `|s - t|^a` for the
    /// calibration mode of `exponent`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_functions: Vec<f64>,
}

/// A validated config with its objects built.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub domain: Domain,
    pub measure: Measure,
    pub metric: MetricKind,
    pub targets: Vec<Point>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn validate(self) -> Result<Experiment, CliError> {
        let bad = |e: silevy::Error| CliError::Usage(format!("config: {e}"));
        let domain = Domain::from_json(&self.domain).map_err(bad)?;
        let measure = self.measure.unwrap_or_else(|| Measure::natural(&domain));
        measure.validate(&domain).map_err(bad)?;
        let metric = self.metric.unwrap_or(MetricKind::symm_diff(measure));
        if let MetricKind::MeasureSymmDiff { measure: m } = &metric {
            m.validate(&domain).map_err(bad)?;
        }
        self.triplet.validate().map_err(bad)?;
        if !(self.eps > 0.0) {
            return Err(CliError::Usage(format!(
                "config: eps must be positive, got {}",
                self.eps
            )));
        }
        if let Some(f) = &self.integrand {
            f.bind(&domain).map_err(bad)?;
        }
        let targets = self
            .targets
            .iter()
            .map(|t| domain.point(t))
            .collect::<silevy::Result<Vec<_>>>()
            .map_err(bad)?;
        if self.estimator.js.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Usage(
                "config: estimator.js must be strictly increasing".into(),
            ));
        }
        Ok(Experiment {
            config: self,
            domain,
            measure,
            metric,
            targets,
        })
    }
}

impl Experiment {
    pub fn run(&self) -> RegularityRun {
        let c = &self.config;
        let e = &c.estimator;
        RegularityRun {
            domain: self.domain.clone(),
            measure: self.measure,
            metric: self.metric,
            triplet: c.triplet.clone(),
            integrand: c.integrand.clone(),
            mode: c.drift,
            level: c.level,
            eps: c.eps,
            seed: c.seed,
            reps: c.reps,
            targets: self.targets.clone(),
            js: e.js.clone(),
            margin: e.margin,
            estimators: Estimators {
                holder: e.holder,
                c_exp: e.c_exp,
                localized: e.localized,
                pc: e.pc,
                jump_bound: e.jump_bound,
            },
        }
    }
}
