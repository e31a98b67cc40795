//! `simulate`, `integrate`, `exponent` and `info`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use silevy::experiments::{PathReport, RegularityRun, TargetEstimate, TargetSummary};
use silevy::export::{read_path, write_x, write_y, StoredPath};
use silevy::indexing::{mesh_delta, IndexSet, Point};
use silevy::integral::{Integrand, SamplePathY};
use silevy::levy::sample_path;
use silevy::regularity::Exponent;

use crate::config::{Experiment, ExperimentConfig};
use crate::theory::{predict, within, Prediction, MEMBERSHIP_RULE};
use crate::{to_json, write_atomic, CliError};

pub const RUN_INDEX: &str = "run.json";
pub const INTEGRATE_REPORT: &str = "integrate.json";
pub const EXPONENT_REPORT: &str = "exponent.json";

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, mut config: ExperimentConfig) -> ExperimentConfig {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(r) = self.reps {
            config.reps = r;
        }
        if let Some(o) = &self.out {
            config.out = Some(o.clone());
        }
        config
    }
}

fn out_dir(config: &ExperimentConfig) -> Result<PathBuf, CliError> {
    config
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("an output directory is required (--out)".into()))
}

fn path_dir(index: u64) -> String {
    format!("path_{index:04}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
}

/// Index of the path directories written by a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunIndex {
    pub command: String,
    pub config: ExperimentConfig,
    pub paths: Vec<PathEntry>,
}

impl RunIndex {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let file = dir.join(RUN_INDEX);
        let text = std::fs::read_to_string(&file)
            .map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))
    }

    /// Reads every stored path, `Y` paths preferred when both exist.
    pub fn read_paths(&self, dir: &Path) -> Result<Vec<StoredPath>, CliError> {
        self.paths
            .iter()
            .map(|p| {
                let rel = p.y.as_ref().or(p.x.as_ref()).ok_or_else(|| {
                    CliError::Usage(format!("path {} has no stored process", p.index))
                })?;
                Ok(read_path(&dir.join(rel))?)
            })
            .collect()
    }
}

/// Writes `R` paths (`X`, plus `Y` when an integrand is configured) and
/// the run index. `R = 0` writes the index only.
pub fn simulate(exp: &Experiment) -> Result<RunIndex, CliError> {
    let out = out_dir(&exp.config)?;
    std::fs::create_dir_all(&out)?;
    let c = &exp.config;
    let entries = (0..c.reps as u64)
        .into_par_iter()
        .map(|i| -> Result<PathEntry, CliError> {
            let x = sample_path(
                &c.triplet,
                &exp.domain,
                &exp.measure,
                c.level,
                c.eps,
                c.seed,
                i,
            )?;
            let base = path_dir(i);
            let x_rel = format!("{base}/x");
            write_x(&out.join(&x_rel), &x)?;
            let y = match &c.integrand {
                Some(f) => {
                    let y = SamplePathY::from_path(x, f, c.drift)?;
                    let y_rel = format!("{base}/y");
                    write_y(&out.join(&y_rel), &y)?;
                    Some(y_rel)
                }
                None => None,
            };
            Ok(PathEntry {
                index: i,
                x: Some(x_rel),
                y,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let index = RunIndex {
        command: "simulate".into(),
        config: c.clone(),
        paths: entries,
    };
    write_atomic(&out.join(RUN_INDEX), &to_json(&index)?)?;
    Ok(index)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetValues {
    pub target: Point,
    /// `None` when the target is not a mesh tip.
    pub x: Option<f64>,
    pub y: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegratedPath {
    pub index: u64,
    pub x_jumps: usize,
    pub y_jumps: usize,
    /// `max |J_s(Y) - f(s) J_s(X)|` over the jumps of `Y`.
    pub jump_error: f64,
    /// Whether the jumps of `Y` are exactly those of `X` where `f != 0`.
    pub support_exact: bool,
    pub values: Vec<TargetValues>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrateReport {
    pub config: ExperimentConfig,
    pub paths: Vec<IntegratedPath>,
    pub max_jump_error: f64,
    pub support_exact: bool,
}

/// Checks `J(Y) = f J(X)` on one path.
pub fn jump_structure(y: &SamplePathY, f: &Integrand) -> Result<(f64, bool), CliError> {
    let d = y.domain();
    let f = f.bind(d)?;
    let xj = y.x().jumps();
    let yj = y.jumps();
    let mut err: f64 = 0.0;
    for (k, &src) in y.jump_sources().iter().enumerate() {
        let s = xj.location(d, src);
        let expected = f.eval(&s) * xj.sizes()[src];
        err = err.max((yj.sizes()[k] - expected).abs());
        if yj.location(d, k) != s {
            err = f64::INFINITY;
        }
    }
    let kept: Vec<usize> = (0..xj.len())
        .filter(|&i| f.eval(&xj.location(d, i)) != 0.0)
        .collect();
    Ok((err, kept == y.jump_sources()))
}

/// Builds `Y = ∫ f dX` on `R` paths, exports them and reports the values
/// at the targets and the jump structure.
pub fn integrate(exp: &Experiment) -> Result<IntegrateReport, CliError> {
    let c = &exp.config;
    let f = c
        .integrand
        .clone()
        .ok_or_else(|| CliError::Usage("integrate needs an integrand in the config".into()))?;
    let out = out_dir(c)?;
    std::fs::create_dir_all(&out)?;
    let paths = (0..c.reps as u64)
        .into_par_iter()
        .map(|i| -> Result<IntegratedPath, CliError> {
            let x = sample_path(
                &c.triplet,
                &exp.domain,
                &exp.measure,
                c.level,
                c.eps,
                c.seed,
                i,
            )?;
            let y = SamplePathY::from_path(x, &f, c.drift)?;
            write_y(&out.join(path_dir(i)).join("y"), &y)?;
            let (jump_error, support_exact) = jump_structure(&y, &f)?;
            let values = exp
                .targets
                .iter()
                .map(|t| {
                    let a = IndexSet::Atom(t.clone());
                    TargetValues {
                        target: t.clone(),
                        x: y.x().field().value(&a),
                        y: y.field().value(&a),
                    }
                })
                .collect();
            Ok(IntegratedPath {
                index: i,
                x_jumps: y.x().jumps().len(),
                y_jumps: y.jumps().len(),
                jump_error,
                support_exact,
                values,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = IntegrateReport {
        config: c.clone(),
        max_jump_error: paths.iter().map(|p| p.jump_error).fold(0.0, f64::max),
        support_exact: paths.iter().all(|p| p.support_exact),
        paths,
    };
    write_atomic(&out.join(INTEGRATE_REPORT), &to_json(&report)?)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetPrediction {
    pub target: Point,
    pub x: Prediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Prediction>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub estimate: Exponent,
    pub band: [Exponent; 2],
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub exponent: f64,
    pub target: Point,
    pub estimates: TargetEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Fresh,
    Stored,
    Calibration,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    pub config: ExperimentConfig,
    pub mode: Mode,
    pub membership_rule: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub predictions: Vec<TargetPrediction>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub calibration: Vec<CalibrationRow>,
    pub paths: Vec<PathReport>,
    pub summary: Vec<TargetSummary>,
    pub verdicts: Vec<Verdict>,
}

impl ExponentReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Theory for `X` (and `Y` when an integrand is configured) at every
/// target.
pub fn predictions(exp: &Experiment) -> Result<Vec<TargetPrediction>, CliError> {
    let beta = exp.config.triplet.beta();
    exp.targets
        .iter()
        .map(|t| {
            let x = predict(
                &exp.domain,
                &exp.measure,
                &exp.metric,
                &Integrand::one(),
                t,
                beta,
            )?;
            let y = match &exp.config.integrand {
                Some(f) => Some(predict(&exp.domain, &exp.measure, &exp.metric, f, t, beta)?),
                None => None,
            };
            Ok(TargetPrediction {
                target: t.clone(),
                x,
                y,
            })
        })
        .collect()
}

fn calibration(exp: &Experiment, run: &RegularityRun) -> Result<Vec<CalibrationRow>, CliError> {
    let mut rows = Vec::new();
    for t in &exp.targets {
        let single = RegularityRun {
            targets: vec![t.clone()],
            ..run.clone()
        };
        let plans = single.plans()?;
        for &a in &exp.config.test_functions {
            let d = &exp.domain;
            let h = |s: &IndexSet| s.tip().map_or(0.0, |s| d.distance(s, t).powf(a));
            let mut est = single.estimate_with(&plans, h, None)?;
            rows.push(CalibrationRow {
                exponent: a,
                target: t.clone(),
                estimates: est.remove(0),
            });
        }
    }
    Ok(rows)
}

fn verdicts(summary: &[TargetSummary], predictions: &[TargetPrediction], tol: f64) -> Vec<Verdict> {
    let mut out = Vec::new();
    for (k, (s, p)) in summary.iter().zip(predictions).enumerate() {
        let mut check =
            |process: &str, est: &silevy::experiments::EstimatorSummary, pred: &Prediction| {
                let pairs = [
                    ("holder", &est.holder, pred.holder),
                    ("localized", &est.localized, pred.localized),
                ];
                for (name, q, band) in pairs {
                    if let Some(q) = q {
                        out.push(Verdict {
                            name: format!("target{k}_{process}_{name}"),
                            estimate: q.median,
                            band,
                            tolerance: tol,
                            pass: within(q.median, band, tol),
                        });
                    }
                }
            };
        if s.x.holder.is_some() || s.x.localized.is_some() {
            check("x", &s.x, &p.x);
        }
        if let (Some(ys), Some(yp)) = (&s.y, &p.y) {
            check("y", ys, yp);
        }
    }
    out
}

/// Estimates on fresh paths, on stored paths (`paths` in the config) or,
/// with `test_functions`, on the deterministic functions `d_T(s, t)^a`.
pub fn exponent(exp: &Experiment) -> Result<ExponentReport, CliError> {
    let c = &exp.config;
    let run = exp.run();
    let mut report = ExponentReport {
        config: c.clone(),
        mode: Mode::Fresh,
        membership_rule: MEMBERSHIP_RULE,
        predictions: Vec::new(),
        calibration: Vec::new(),
        paths: Vec::new(),
        summary: Vec::new(),
        verdicts: Vec::new(),
    };
    if !c.test_functions.is_empty() {
        report.mode = Mode::Calibration;
        report.calibration = calibration(exp, &run)?;
        if let Some(tol) = c.estimator.tolerance {
            for row in &report.calibration {
                let band = [Exponent::Finite(row.exponent); 2];
                let e = &row.estimates;
                let named = [
                    ("holder", &e.holder),
                    ("c_exp", &e.c_exp),
                    ("localized", &e.localized),
                    ("pc", &e.pc),
                ];
                for (name, est) in named {
                    if let Some(est) = est {
                        report.verdicts.push(Verdict {
                            name: format!("calibration_{}_{name}", row.exponent),
                            estimate: est.value,
                            band,
                            tolerance: tol,
                            pass: within(est.value, band, tol),
                        });
                    }
                }
            }
        }
    } else {
        report.paths = match &c.paths {
            Some(dir) => {
                report.mode = Mode::Stored;
                let stored = RunIndex::load(dir)?.read_paths(dir)?;
                run.run_stored(&stored)?
            }
            None => run.run()?,
        };
        report.summary = run.summarize(&report.paths);
        if !exp.targets.is_empty() {
            report.predictions = predictions(exp)?;
        }
        if let Some(tol) = c.estimator.tolerance {
            report.verdicts = verdicts(&report.summary, &report.predictions, tol);
        }
    }
    if let Some(out) = &c.out {
        std::fs::create_dir_all(out)?;
        write_atomic(&out.join(EXPONENT_REPORT), &to_json(&report)?)?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunInfo {
    pub cells: usize,
    pub mesh_extent_mass: f64,
    /// Expected number of simulated jumps per path.
    pub jump_intensity: f64,
    pub beta: f64,
    pub mean_rate: f64,
    pub var_rate: f64,
    pub mesh_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Info {
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunInfo>,
}

pub fn info(exp: Option<&Experiment>) -> Info {
    Info {
        version: env!("CARGO_PKG_VERSION"),
        run: exp.map(|e| {
            let c = &e.config;
            let cells = e.domain.cells(c.level).len();
            let mass = e.measure.of_mesh_extent(&e.domain, c.level);
            RunInfo {
                cells,
                mesh_extent_mass: mass,
                jump_intensity: c.triplet.nu.mass_above(c.eps) * mass,
                beta: c.triplet.beta(),
                mean_rate: c.triplet.mean_rate(),
                var_rate: c.triplet.var_rate(),
                mesh_delta: mesh_delta(&e.domain, c.level, &e.metric),
            }
        }),
    }
}
