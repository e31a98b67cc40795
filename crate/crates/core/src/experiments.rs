//! Replicated regularity experiments: simulate paths, estimate exponents
//! at target points, and aggregate quantiles over replications.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::export::{Process, StoredPath};
use crate::indexing::{Domain, IndexSet, MetricKind, Point};
use crate::integral::{DriftMode, Integrand, SamplePathY};
use crate::levy::{sample_path, CellField, JumpList, LevyTriplet};
use crate::measure::Measure;
use crate::regularity::{
    jump_upper_bound, pc_exponent, quantile, BallPlan, Exponent, ExponentEstimate, LocalizedPlan,
    MeshLadder, RHO_CUT,
};

/// Which estimators to run at each target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Estimators {
    pub holder: bool,
    pub c_exp: bool,
    pub localized: bool,
    pub pc: bool,
    pub jump_bound: bool,
}

impl Default for Estimators {
    fn default() -> Self {
        Estimators {
            holder: true,
            c_exp: false,
            localized: false,
            pc: false,
            jump_bound: false,
        }
    }
}

/// Everything needed to run one batch of paths.
#[derive(Clone, Debug)]
pub struct RegularityRun {
    pub domain: Domain,
    pub measure: Measure,
    pub metric: MetricKind,
    pub triplet: LevyTriplet,
    /// `Y = ∫ f dX` is analysed alongside `X` when present.
    pub integrand: Option<Integrand>,
    pub mode: DriftMode,
    pub level: u32,
    pub eps: f64,
    pub seed: u64,
    pub reps: usize,
    pub targets: Vec<Point>,
    pub js: Vec<u32>,
    pub margin: u32,
    pub estimators: Estimators,
}

/// Estimates for one target on one path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetEstimate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder: Option<ExponentEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_exp: Option<ExponentEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub localized: Option<ExponentEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc: Option<ExponentEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump_bound: Option<Exponent>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathReport {
    pub index: u64,
    pub jumps: usize,
    pub x: Vec<TargetEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<TargetEstimate>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub q25: Exponent,
    pub median: Exponent,
    pub q75: Exponent,
    pub count: usize,
}

impl Quantiles {
    pub fn of(values: &[Exponent]) -> Option<Self> {
        Some(Quantiles {
            q25: quantile(values, 0.25)?,
            median: quantile(values, 0.5)?,
            q75: quantile(values, 0.75)?,
            count: values.len(),
        })
    }
}

/// Replication quantiles of each configured estimator.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EstimatorSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder: Option<Quantiles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_exp: Option<Quantiles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub localized: Option<Quantiles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc: Option<Quantiles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump_bound: Option<Quantiles>,
}

impl EstimatorSummary {
    pub fn of<'a>(estimates: impl Iterator<Item = &'a TargetEstimate> + Clone) -> Self {
        let q = |f: &dyn Fn(&TargetEstimate) -> Option<Exponent>| {
            let v: Vec<Exponent> = estimates.clone().filter_map(f).collect();
            Quantiles::of(&v)
        };
        EstimatorSummary {
            holder: q(&|e| e.holder.as_ref().map(|x| x.value)),
            c_exp: q(&|e| e.c_exp.as_ref().map(|x| x.value)),
            localized: q(&|e| e.localized.as_ref().map(|x| x.value)),
            pc: q(&|e| e.pc.as_ref().map(|x| x.value)),
            jump_bound: q(&|e| e.jump_bound),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetSummary {
    pub target: Point,
    pub x: EstimatorSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<EstimatorSummary>,
}

/// Precomputed estimator geometry, shared by all paths of a run.
pub struct Plans {
    balls: Vec<Option<BallPlan>>,
    local: Vec<Option<LocalizedPlan>>,
    pc_levels: Vec<u32>,
}

impl RegularityRun {
    pub fn ladder(&self) -> MeshLadder {
        MeshLadder {
            margin: self.margin,
            max_level: self.level,
        }
    }

    pub fn plans(&self) -> Result<Plans> {
        let ladder = self.ladder();
        let est = self.estimators;
        let mut balls = Vec::new();
        let mut local = Vec::new();
        for t in &self.targets {
            self.domain.check_point(t)?;
            let a = IndexSet::Atom(t.clone());
            balls.push(if est.holder || est.c_exp {
                let plan = BallPlan::new(&self.domain, &a, &self.metric, &self.js, &ladder)?;
                Some(if est.c_exp {
                    plan.with_pairs(&self.domain)
                } else {
                    plan
                })
            } else {
                None
            });
            local.push(if est.localized {
                Some(LocalizedPlan::new(
                    &self.domain,
                    t,
                    &self.metric,
                    &self.js,
                    &ladder,
                )?)
            } else {
                None
            });
        }
        let pc_levels = self
            .js
            .iter()
            .copied()
            .filter(|&j| j <= self.level)
            .collect();
        Ok(Plans {
            balls,
            local,
            pc_levels,
        })
    }

    /// All configured estimates for the set function stored in `field`.
    pub fn estimate(
        &self,
        plans: &Plans,
        field: &CellField,
        jumps: Option<&JumpList>,
    ) -> Result<Vec<TargetEstimate>> {
        self.estimate_with(
            plans,
            |a: &IndexSet| field.value(a).unwrap_or(f64::NAN),
            jumps,
        )
    }

    /// All configured estimates for an arbitrary set function `h`.
    pub fn estimate_with<H: Fn(&IndexSet) -> f64 + Copy>(
        &self,
        plans: &Plans,
        h: H,
        jumps: Option<&JumpList>,
    ) -> Result<Vec<TargetEstimate>> {
        let est = self.estimators;
        let mut out = Vec::with_capacity(self.targets.len());
        for (k, t) in self.targets.iter().enumerate() {
            let ball = plans.balls[k].as_ref();
            let holder = match ball {
                Some(b) if est.holder => Some(b.holder(h)?),
                _ => None,
            };
            let c_exp = match ball {
                Some(b) if est.c_exp => Some(b.c_exponent(h)?),
                _ => None,
            };
            let localized = match &plans.local[k] {
                Some(p) => Some(p.estimate(h)?),
                None => None,
            };
            let pc = if est.pc {
                Some(pc_exponent(
                    &self.domain,
                    h,
                    t,
                    &self.measure,
                    &plans.pc_levels,
                )?)
            } else {
                None
            };
            let jump_bound = match (est.jump_bound, jumps) {
                (true, Some(j)) => Some(jump_upper_bound(
                    &self.domain,
                    &self.metric,
                    &IndexSet::Atom(t.clone()),
                    j,
                    RHO_CUT,
                    self.level,
                )?),
                _ => None,
            };
            out.push(TargetEstimate {
                holder,
                c_exp,
                localized,
                pc,
                jump_bound,
            });
        }
        Ok(out)
    }

    fn one_path(&self, plans: &Plans, index: u64) -> Result<PathReport> {
        let x = sample_path(
            &self.triplet,
            &self.domain,
            &self.measure,
            self.level,
            self.eps,
            self.seed,
            index,
        )?;
        let jumps = x.jumps().len();
        let xs = self.estimate(plans, x.field(), Some(x.jumps()))?;
        let ys = match &self.integrand {
            Some(f) => {
                let y = SamplePathY::from_path(x, f, self.mode)?;
                Some(self.estimate(plans, y.field(), Some(y.jumps()))?)
            }
            None => None,
        };
        Ok(PathReport {
            index,
            jumps,
            x: xs,
            y: ys,
        })
    }

    /// Runs all replications in parallel; the result is ordered by path
    /// index and independent of the thread count.
    pub fn run(&self) -> Result<Vec<PathReport>> {
        let plans = self.plans()?;
        (0..self.reps as u64)
            .into_par_iter()
            .map(|i| self.one_path(&plans, i))
            .collect()
    }

    /// Estimates on paths read from disk; each path reports under `x` or
    /// `y` according to its header.
    pub fn run_stored(&self, paths: &[StoredPath]) -> Result<Vec<PathReport>> {
        let plans = self.plans()?;
        paths
            .par_iter()
            .map(|p| {
                let est = self.estimate(&plans, &p.field, Some(&p.jumps))?;
                let (x, y) = match p.header.process {
                    Process::X => (est, None),
                    Process::Y => (Vec::new(), Some(est)),
                };
                Ok(PathReport {
                    index: p.header.stream,
                    jumps: p.jumps.len(),
                    x,
                    y,
                })
            })
            .collect()
    }

    pub fn summarize(&self, reports: &[PathReport]) -> Vec<TargetSummary> {
        self.targets
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let xs = reports.iter().filter_map(|r| r.x.get(k));
                let ys = reports
                    .iter()
                    .filter_map(|r| r.y.as_ref().and_then(|y| y.get(k)));
                TargetSummary {
                    target: t.clone(),
                    x: EstimatorSummary::of(xs),
                    y: reports
                        .iter()
                        .any(|r| r.y.is_some())
                        .then(|| EstimatorSummary::of(ys)),
                }
            })
            .collect()
    }
}
