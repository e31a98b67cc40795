//! The verification suite: fixed regularity experiments compared against
//! their theoretical exponents, one verdict per check.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use silevy::experiments::{PathReport, Quantiles, TargetSummary};
use silevy::integral::Integrand;
use silevy::regularity::{mass_curves, predict_1d, Exponent};

use crate::config::{Experiment, ExperimentConfig};
use crate::theory::{rhos, INF_FLOOR};
use crate::{to_json, write_atomic, CliError};

pub const VERIFY_REPORT: &str = "verify.json";

/// Half-width of the band for the line experiment medians.
pub const LINE_TOL: f64 = 0.25;
pub const PLANE_HOLDER_TOL: f64 = 0.3;
pub const PLANE_LOCALIZED_TOL: f64 = 0.4;
pub const PLANE_SPLIT: f64 = 0.5;
/// Allowed excess of an estimate over its jump bound.
pub const JUMP_SLACK: f64 = 0.2;
/// Allowed deficit of the `Y` median below the `X` median.
pub const REGULARIZATION_SLACK: f64 = 0.1;
const PLANE_QUAD_LEVEL: u32 = 9;

fn default_seed() -> u64 {
    7
}

fn default_reps() -> usize {
    50
}

/// Settings accepted by `verify`; the experiments themselves are fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySettings {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Paths per experiment.
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            seed: default_seed(),
            reps: default_reps(),
            out: None,
        }
    }
}

impl VerifySettings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }
}

fn config(value: serde_json::Value) -> ExperimentConfig {
    serde_json::from_value(value).expect("built-in experiment config")
}

/// Stable `β = 1.5` on `[0, 1]` with `f(s) = |s - 0.5|^0.5`, targets 0.5
/// and 0.25.
pub fn line_experiment(s: &VerifySettings) -> ExperimentConfig {
    config(json!({
        "domain": {"type": "box", "p": 1, "side": 1.0},
        "triplet": {"b": 0.0, "sigma2": 0.0, "nu": {"stable": {"alpha": 1.5, "c": 1.0}}},
        "integrand": {"type": "power_dist", "center": [0.5], "exponent": 0.5},
        "drift": "cancel",
        "level": 14,
        "eps": (-14f64).exp2(),
        "targets": [[0.5], [0.25]],
        "estimator": {"holder": true, "jump_bound": true},
        "reps": s.reps,
        "seed": s.seed,
    }))
}

/// Stable `β = 1` on `[0, 1]²` under `d_m`, target at the centre.
pub fn plane_experiment(s: &VerifySettings) -> ExperimentConfig {
    config(json!({
        "domain": {"type": "box", "p": 2, "side": 1.0},
        "triplet": {"b": 0.0, "sigma2": 0.0, "nu": {"stable": {"alpha": 1.0, "c": 1.0}}},
        "level": 9,
        "eps": (-20f64).exp2(),
        "targets": [[0.5, 0.5]],
        "estimator": {"js": [4, 5, 6, 7, 8], "margin": 1, "holder": true, "localized": true},
        "reps": s.reps,
        "seed": s.seed,
    }))
}

/// Compound Poisson with jumps of size 2 at rate 3: `β = 0`.
pub fn finite_experiment(s: &VerifySettings) -> ExperimentConfig {
    config(json!({
        "domain": {"type": "box", "p": 1, "side": 1.0},
        "triplet": {"b": 0.0, "sigma2": 0.0, "nu": {"atoms": [{"x": 2.0, "rate": 3.0}]}},
        "level": 12,
        "eps": 1.0,
        "targets": [[0.5]],
        "estimator": {"holder": true},
        "reps": s.reps,
        "seed": s.seed,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub measured: Exponent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<usize>,
    pub pass: bool,
}

impl Check {
    fn band(name: &'static str, measured: Exponent, prediction: Exponent, tol: f64) -> Self {
        let (lower, upper) = match prediction {
            Exponent::Finite(p) => (p - tol, Some(p + tol)),
            Exponent::Infinite => (INF_FLOOR, None),
        };
        let v = measured.value();
        Check {
            name,
            measured,
            prediction: Some(prediction),
            lower: Some(lower),
            upper,
            violations: None,
            pass: v >= lower && upper.is_none_or(|u| v <= u),
        }
    }

    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let mut s = format!("{status} {} measured={}", self.name, self.measured);
        if let Some(p) = self.prediction {
            s.push_str(&format!(" predicted={p}"));
        }
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => s.push_str(&format!(" band=[{l:.4}, {u:.4}]")),
            (Some(l), None) => s.push_str(&format!(" floor={l:.4}")),
            (None, Some(u)) => s.push_str(&format!(" ceiling={u:.4}")),
            (None, None) => {}
        }
        if let Some(v) = self.violations {
            s.push_str(&format!(" violations={v}"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Experiments {
    pub line: ExperimentConfig,
    pub plane: ExperimentConfig,
    pub finite: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneFit {
    pub q_v: f64,
    pub q_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub reps: usize,
    pub experiments: Experiments,
    pub plane_fit: PlaneFit,
    pub line_summary: Vec<TargetSummary>,
    pub plane_summary: Vec<TargetSummary>,
    pub finite_summary: Vec<TargetSummary>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn median(q: &Option<Quantiles>) -> Result<Exponent, CliError> {
    q.as_ref()
        .map(|q| q.median)
        .ok_or_else(|| CliError::Usage("verify experiment produced no estimates".into()))
}

fn run(
    config: ExperimentConfig,
) -> Result<(Experiment, Vec<PathReport>, Vec<TargetSummary>), CliError> {
    let exp = config.validate()?;
    let r = exp.run();
    let reports = r.run()?;
    let summary = r.summarize(&reports);
    Ok((exp, reports, summary))
}

/// Counts estimates above their jump bound plus the slack, and returns the
/// largest excess.
pub fn jump_dominance(reports: &[PathReport]) -> (usize, f64) {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let all = reports
        .iter()
        .flat_map(|r| r.x.iter().chain(r.y.iter().flatten()));
    for e in all {
        if let (Some(h), Some(b)) = (&e.holder, e.jump_bound) {
            let excess = match (h.value, b) {
                (_, Exponent::Infinite) => f64::NEG_INFINITY,
                (Exponent::Infinite, _) => f64::INFINITY,
                (Exponent::Finite(v), Exponent::Finite(b)) => v - b,
            };
            worst = worst.max(excess);
            if excess > JUMP_SLACK {
                violations += 1;
            }
        }
    }
    (violations, worst)
}

/// Runs the three experiments and checks them against theory. The report
/// depends only on the settings, so equal seeds give equal bytes.
pub fn verify(settings: &VerifySettings) -> Result<VerifyReport, CliError> {
    let experiments = Experiments {
        line: line_experiment(settings),
        plane: plane_experiment(settings),
        finite: finite_experiment(settings),
    };
    let mut checks = Vec::new();

    let (line, line_reports, line_summary) = run(experiments.line.clone())?;
    let beta = line.config.triplet.beta();
    let f = line.config.integrand.clone().expect("line integrand");
    let (t_zero, t_off) = (&line.targets[0], &line.targets[1]);
    let one = Integrand::one();
    let y_summary = |k: usize| line_summary[k].y.as_ref().expect("line integrand");
    let x0 = median(&line_summary[0].x.holder)?;
    checks.push(Check::band(
        "line_holder_x",
        x0,
        predict_1d(&one, &line.domain, t_zero, beta)?,
        LINE_TOL,
    ));
    let y0 = median(&y_summary(0).holder)?;
    checks.push(Check::band(
        "line_holder_y_zero",
        y0,
        predict_1d(&f, &line.domain, t_zero, beta)?,
        LINE_TOL,
    ));
    let y1 = median(&y_summary(1).holder)?;
    checks.push(Check::band(
        "line_holder_y_off",
        y1,
        predict_1d(&f, &line.domain, t_off, beta)?,
        LINE_TOL,
    ));
    let (violations, worst) = jump_dominance(&line_reports);
    checks.push(Check {
        name: "jump_bound_dominance",
        measured: Exponent::from_f64(worst),
        prediction: None,
        lower: None,
        upper: Some(JUMP_SLACK),
        violations: Some(violations),
        pass: violations == 0,
    });
    let mut gap = f64::INFINITY;
    for s in &line_summary {
        let x = median(&s.x.holder)?.value();
        let y = median(&s.y.as_ref().expect("line integrand").holder)?.value();
        gap = gap.min(y - x);
    }
    checks.push(Check {
        name: "regularization",
        measured: Exponent::from_f64(gap),
        prediction: None,
        lower: Some(-REGULARIZATION_SLACK),
        upper: None,
        violations: None,
        pass: gap >= -REGULARIZATION_SLACK,
    });

    let (plane, _, plane_summary) = run(experiments.plane.clone())?;
    let curves = mass_curves(
        &one,
        &plane.domain,
        &plane.measure,
        &plane.metric,
        &plane.targets[0],
        &[0.0],
        &rhos(),
        PLANE_QUAD_LEVEL,
    )?;
    let beta = plane.config.triplet.beta();
    let plain = median(&plane_summary[0].x.holder)?;
    let local = median(&plane_summary[0].x.localized)?;
    checks.push(Check::band(
        "plane_holder",
        plain,
        Exponent::Finite(curves.q_v / beta),
        PLANE_HOLDER_TOL,
    ));
    checks.push(Check::band(
        "plane_localized",
        local,
        Exponent::Finite(curves.q_b / beta),
        PLANE_LOCALIZED_TOL,
    ));
    let split = local.value() - plain.value();
    checks.push(Check {
        name: "plane_split",
        measured: Exponent::from_f64(split),
        prediction: None,
        lower: Some(PLANE_SPLIT),
        upper: None,
        violations: None,
        pass: split >= PLANE_SPLIT,
    });

    let (finite, _, finite_summary) = run(experiments.finite.clone())?;
    checks.push(Check::band(
        "finite_activity_floor",
        median(&finite_summary[0].x.holder)?,
        predict_1d(
            &one,
            &finite.domain,
            &finite.targets[0],
            finite.config.triplet.beta(),
        )?,
        0.0,
    ));

    let all_pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        seed: settings.seed,
        reps: settings.reps,
        experiments,
        plane_fit: PlaneFit {
            q_v: curves.q_v,
            q_b: curves.q_b,
        },
        line_summary,
        plane_summary,
        finite_summary,
        checks,
        all_pass,
    };
    if let Some(out) = &settings.out {
        std::fs::create_dir_all(out)?;
        write_atomic(&out.join(VERIFY_REPORT), &to_json(&report)?)?;
    }
    Ok(report)
}
