//! Integrals `Y_A = ∫_A f dX` of deterministic integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexing::{CellLayout, Domain, IncrementSet, IndexSet, Point};
use crate::levy::{sample_path, CellField, JumpList, LevyTriplet, SamplePath};
use crate::measure::{cell_center, Measure};

/// Integrand specification. Points are given as number lists: coordinates
/// on boxes, child indices on trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Integrand {
    Constant {
        c: f64,
    },
    /// `f(s) = d_T(s, center)^exponent`.
    PowerDist {
        center: Vec<f64>,
        exponent: f64,
    },
    /// `d_T(s, center)^a` on the box `E = [lo, hi]`, `d_T(s, center)^a_off`
    /// elsewhere. Box domains only.
    SetMixture {
        center: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        a: f64,
        a_off: f64,
    },
    /// Piecewise constant on the cells of mesh level `level`, zero outside
    /// the mesh extent.
    GridTable {
        level: u32,
        values: Vec<f64>,
    },
}

impl Integrand {
    pub fn one() -> Self {
        Integrand::Constant { c: 1.0 }
    }

    pub fn power(center: &[f64], exponent: f64) -> Self {
        Integrand::PowerDist {
            center: center.to_vec(),
            exponent,
        }
    }

    /// Checks the specification against `domain` and prepares it for
    /// evaluation.
    pub fn bind(&self, domain: &Domain) -> Result<BoundIntegrand> {
        let kind = match self {
            Integrand::Constant { c } => {
                if !c.is_finite() {
                    return Err(Error::InvalidParameter(format!("constant {c}")));
                }
                Kind::Constant(*c)
            }
            Integrand::PowerDist { center, exponent } => {
                check_exponent(*exponent)?;
                Kind::Power {
                    center: domain.point(center)?,
                    exponent: *exponent,
                }
            }
            Integrand::SetMixture {
                center,
                lo,
                hi,
                a,
                a_off,
            } => {
                check_exponent(*a)?;
                check_exponent(*a_off)?;
                if domain.as_box().is_none() {
                    return Err(Error::DomainMismatch(
                        "set mixtures need a box domain".into(),
                    ));
                }
                if lo.len() != domain.dim() || hi.len() != domain.dim() {
                    return Err(Error::InvalidParameter("mixture box dimension".into()));
                }
                Kind::Mixture {
                    center: domain.point(center)?,
                    lo: lo.clone(),
                    hi: hi.clone(),
                    a: *a,
                    a_off: *a_off,
                }
            }
            Integrand::GridTable { level, values } => {
                let cells = domain.cells(*level);
                if cells.len() != values.len() {
                    return Err(Error::InvalidParameter(format!(
                        "grid table has {} values, level {level} has {} cells",
                        values.len(),
                        cells.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite grid value".into()));
                }
                Kind::Table {
                    cells,
                    values: values.clone(),
                }
            }
        };
        Ok(BoundIntegrand {
            domain: domain.clone(),
            kind,
        })
    }
}

fn check_exponent(a: f64) -> Result<()> {
    if a.is_finite() && a >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent {a}")))
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Constant(f64),
    Power {
        center: Point,
        exponent: f64,
    },
    Mixture {
        center: Point,
        lo: Vec<f64>,
        hi: Vec<f64>,
        a: f64,
        a_off: f64,
    },
    Table {
        cells: CellLayout,
        values: Vec<f64>,
    },
}

/// An integrand checked against a domain.
#[derive(Clone, Debug)]
pub struct BoundIntegrand {
    domain: Domain,
    kind: Kind,
}

impl BoundIntegrand {
    pub fn eval(&self, s: &Point) -> f64 {
        match (&self.kind, s) {
            (_, Point::Box(c)) => self.eval_coords(c),
            (Kind::Constant(c), _) => *c,
            (Kind::Power { center, exponent }, _) => {
                self.domain.distance(s, center).powf(*exponent)
            }
            (Kind::Table { cells, values }, _) => {
                cells.locate(&self.domain, s).map_or(0.0, |i| values[i])
            }
            (Kind::Mixture { .. }, _) => f64::NAN,
        }
    }

    /// Evaluation at box coordinates without building a [`Point`].
    pub fn eval_coords(&self, s: &[f64]) -> f64 {
        let dist = |center: &Point| {
            center.coords().map_or(f64::NAN, |c| {
                c.iter()
                    .zip(s)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
        };
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Power { center, exponent } => dist(center).powf(*exponent),
            Kind::Mixture {
                center,
                lo,
                hi,
                a,
                a_off,
            } => {
                let inside = s
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(x, (l, h))| *l <= *x && *x <= *h);
                dist(center).powf(if inside { *a } else { *a_off })
            }
            Kind::Table { cells, values } => match cells {
                CellLayout::Box(l) => l.locate(s).map_or(0.0, |i| values[i]),
                CellLayout::Tree { .. } => f64::NAN,
            },
        }
    }
}

/// Quadrature nodes of a mesh level: cell tips (for the Gaussian part),
/// midpoints and masses.
struct Quadrature {
    cells: CellLayout,
    masses: Vec<f64>,
    /// `f` at the cell tip.
    at_tip: Vec<f64>,
    /// Midpoint rule for `∫_cell f dm`.
    integral: Vec<f64>,
}

impl Quadrature {
    fn new(f: &BoundIntegrand, domain: &Domain, measure: &Measure, level: u32) -> Self {
        let cells = domain.cells(level);
        let masses = measure.cell_masses(domain, &cells);
        let (at_tip, integral) = match &cells {
            CellLayout::Box(l) => (0..l.len())
                .map(|i| {
                    let tip = f.eval_coords(&l.tip_coords(i));
                    let mid = if masses[i] > 0.0 {
                        f.eval_coords(&cell_center(l, i)) * masses[i]
                    } else {
                        0.0
                    };
                    (tip, mid)
                })
                .unzip(),
            CellLayout::Tree { .. } => (0..cells.len())
                .map(|i| {
                    let v = f.eval(&cells.tip(domain, i));
                    (v, if masses[i] > 0.0 { v * masses[i] } else { 0.0 })
                })
                .unzip(),
        };
        Quadrature {
            cells,
            masses,
            at_tip,
            integral,
        }
    }

    fn cells_in(&self, domain: &Domain, a: &IndexSet) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| domain.contains(a, &self.cells.tip(domain, i)))
            .collect()
    }
}

/// `‖f‖_{L(X)} = sqrt(mean_rate² ‖f‖²_{L¹} + var_rate ‖f‖²_{L²})`, with the
/// norms computed by the midpoint rule on the level-`level` cells.
pub fn lx_norm(
    f: &Integrand,
    triplet: &LevyTriplet,
    domain: &Domain,
    measure: &Measure,
    level: u32,
) -> Result<f64> {
    let f = f.bind(domain)?;
    let cells = domain.cells(level);
    let masses = measure.cell_masses(domain, &cells);
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for (i, &m) in masses.iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        let v = match &cells {
            CellLayout::Box(l) => f.eval_coords(&cell_center(l, i)),
            CellLayout::Tree { .. } => f.eval(&cells.tip(domain, i)),
        };
        l1 += v.abs() * m;
        l2 += v * v * m;
    }
    let mean = triplet.mean_rate();
    let var = triplet.var_rate();
    // 0 · ∞ = 0
    let term = |rate: f64, norm2: f64| {
        if rate == 0.0 || norm2 == 0.0 {
            0.0
        } else {
            rate * norm2
        }
    };
    Ok((term(mean * mean, l1 * l1) + term(var, l2)).sqrt())
}

fn check_resolvable(path: &SamplePath, a: &IndexSet) -> Result<()> {
    let ok = match (a, path.domain()) {
        (IndexSet::Whole, Domain::Tree(tr)) => tr.max_depth() <= path.level(),
        _ => path.domain().set_on_mesh(a, path.level()),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::NotMeshAligned(path.level()))
    }
}

/// `Σ_{C ⊆ A} f(t_C) ΔX_C` over the cells of the path's mesh, `t_C` the
/// tip of `C`.
pub fn integrate_cellwise(path: &SamplePath, f: &Integrand, a: &IndexSet) -> Result<f64> {
    check_resolvable(path, a)?;
    let f = f.bind(path.domain())?;
    let domain = path.domain();
    let cells = path.field().cells();
    let inc = path.field().increments();
    Ok((0..cells.len())
        .filter_map(|i| {
            let tip = cells.tip(domain, i);
            domain.contains(a, &tip).then(|| f.eval(&tip) * inc[i])
        })
        .sum())
}

/// `Σ_{t ∈ Π ∩ A} f(t) J_t − compensator · ∫_A f dm`, with `f` evaluated
/// at the exact jump locations.
pub fn integrate_jumps(path: &SamplePath, f: &Integrand, a: &IndexSet) -> Result<f64> {
    if path.triplet().sigma2 != 0.0 {
        return Err(Error::NotPurelyPoissonian);
    }
    let domain = path.domain();
    let f = f.bind(domain)?;
    let jumps = path.jumps();
    let mut total = 0.0;
    for i in 0..jumps.len() {
        let loc = jumps.location(domain, i);
        if domain.contains(a, &loc) {
            total += f.eval(&loc) * jumps.sizes()[i];
        }
    }
    let comp = path.compensator();
    if comp != 0.0 {
        let q = Quadrature::new(&f, domain, path.measure(), path.level());
        let fm: f64 = q.cells_in(domain, a).iter().map(|&i| q.integral[i]).sum();
        total -= comp * fm;
    }
    Ok(total)
}

/// How the drift is handled when building `Y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMode {
    /// Drift `b ∫ f dm` and compensator as in `X`.
    #[default]
    Keep,
    /// Drop the drift. When `∫_{|x|<=1} |x| ν` is finite the jumps are
    /// also left uncompensated (zero drift in the integrable-jump
    /// representation); otherwise the compensator stays.
    Cancel,
}

/// A sample of `Y = ∫ f dX` sharing its randomness with an `X` path.
#[derive(Clone, Debug)]
pub struct SamplePathY {
    x: SamplePath,
    integrand: Integrand,
    mode: DriftMode,
    jumps: JumpList,
    /// Index in the `X` jump list of every `Y` jump.
    source: Vec<usize>,
    gaussian: Vec<f64>,
    drift_table: Vec<f64>,
    field: CellField,
}

impl SamplePathY {
    /// Builds `Y` on the mesh of `x`.
    pub fn from_path(x: SamplePath, f: &Integrand, mode: DriftMode) -> Result<Self> {
        let domain = x.domain().clone();
        let bound = f.bind(&domain)?;
        let q = Quadrature::new(&bound, &domain, x.measure(), x.level());
        let triplet = x.triplet();
        let (b, comp) = match mode {
            DriftMode::Keep => (triplet.b, x.compensator()),
            DriftMode::Cancel if triplet.nu.abs_small().is_some() => (0.0, 0.0),
            DriftMode::Cancel => (0.0, x.compensator()),
        };

        let xj = x.jumps();
        let fj: Vec<f64> = (0..xj.len())
            .map(|i| match xj.coords(i) {
                Some(c) => bound.eval_coords(c),
                None => bound.eval(&xj.location(&domain, i)),
            })
            .collect();
        let source: Vec<usize> = (0..xj.len()).filter(|&i| fj[i] != 0.0).collect();
        let jumps = xj.map_sizes(|i| {
            if fj[i] != 0.0 {
                fj[i] * xj.sizes()[i]
            } else {
                0.0
            }
        });
        debug_assert_eq!(jumps.len(), source.len());

        let n_cells = q.masses.len();
        let gaussian: Vec<f64> = (0..n_cells)
            .map(|i| q.at_tip[i] * x.gaussian_cells()[i])
            .collect();
        let mut jump_sums = vec![0.0; n_cells];
        for (&c, &s) in jumps.cells().iter().zip(jumps.sizes()) {
            jump_sums[c] += s;
        }
        let drift_table = q.integral.clone();
        let increments: Vec<f64> = (0..n_cells)
            .map(|i| b * drift_table[i] + gaussian[i] + jump_sums[i] - comp * drift_table[i])
            .collect();
        let field = CellField::new(&domain, x.level(), increments);
        Ok(SamplePathY {
            x,
            integrand: f.clone(),
            mode,
            jumps,
            source,
            gaussian,
            drift_table,
            field,
        })
    }

    pub fn x(&self) -> &SamplePath {
        &self.x
    }

    pub fn integrand(&self) -> &Integrand {
        &self.integrand
    }

    pub fn mode(&self) -> DriftMode {
        self.mode
    }

    pub fn domain(&self) -> &Domain {
        self.x.domain()
    }

    pub fn level(&self) -> u32 {
        self.x.level()
    }

    /// Jumps `(t, f(t) J_t(X))` for `f(t) ≠ 0`.
    pub fn jumps(&self) -> &JumpList {
        &self.jumps
    }

    /// For every `Y` jump, the index of the `X` jump it comes from.
    pub fn jump_sources(&self) -> &[usize] {
        &self.source
    }

    /// `f(t_C) σ ΔB_C` per cell.
    pub fn gaussian_cells(&self) -> &[f64] {
        &self.gaussian
    }

    /// `∫_C f dm` per cell (midpoint rule).
    pub fn drift_table(&self) -> &[f64] {
        &self.drift_table
    }

    pub fn field(&self) -> &CellField {
        &self.field
    }

    /// `Y_A` for a mesh atom.
    pub fn y(&self, a: &IndexSet) -> Result<f64> {
        self.field
            .value(a)
            .ok_or(Error::NotMeshAligned(self.level()))
    }

    /// `ΔY_C`.
    pub fn delta_y(&self, c: &IncrementSet) -> Result<f64> {
        self.field.delta(c)
    }

    pub fn delta_y_union(&self, union: &[IncrementSet]) -> Result<f64> {
        crate::measure::check_disjoint(self.domain(), union.iter())?;
        union.iter().map(|c| self.delta_y(c)).sum()
    }
}

/// Samples `X` and builds `Y = ∫ f dX` from it.
#[allow(clippy::too_many_arguments)]
pub fn sample_y(
    triplet: &LevyTriplet,
    f: &Integrand,
    domain: &Domain,
    measure: &Measure,
    n: u32,
    eps: f64,
    seed: u64,
    stream: u64,
    mode: DriftMode,
) -> Result<SamplePathY> {
    f.bind(domain)?;
    let x = sample_path(triplet, domain, measure, n, eps, seed, stream)?;
    SamplePathY::from_path(x, f, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyMeasureSpec;

    fn unit_line() -> Domain {
        Domain::unit_box(1)
    }

    #[test]
    fn lx_norm_examples() {
        let d2 = Domain::unit_box(2);
        let m = Measure::lebesgue();
        let gauss = LevyTriplet::new(0.0, 1.0, LevyMeasureSpec::zero()).unwrap();
        let zero = Integrand::Constant { c: 0.0 };
        assert_eq!(lx_norm(&zero, &gauss, &d2, &m, 4).unwrap(), 0.0);
        assert!((lx_norm(&Integrand::one(), &gauss, &d2, &m, 4).unwrap() - 1.0).abs() < 1e-12);
        let drift = LevyTriplet::new(1.0, 0.0, LevyMeasureSpec::zero()).unwrap();
        let v = lx_norm(&Integrand::power(&[0.0], 1.0), &drift, &unit_line(), &m, 6).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cellwise_recovers_x_and_is_linear() {
        let d = Domain::unit_box(2);
        let m = Measure::lebesgue();
        let nu = LevyMeasureSpec::atoms(&[(0.5, 3.0)]);
        let t = LevyTriplet::new(0.3, 1.0, nu).unwrap();
        let path = sample_path(&t, &d, &m, 4, 0.1, 5, 0).unwrap();
        let a = IndexSet::atom(&[0.75, 0.5]);
        let xa = path.x(&a).unwrap();
        let one = integrate_cellwise(&path, &Integrand::one(), &a).unwrap();
        assert!((one - xa).abs() < 1e-12);
        let three = integrate_cellwise(&path, &Integrand::Constant { c: 3.0 }, &a).unwrap();
        assert!((three - 3.0 * xa).abs() < 1e-12);

        let f = Integrand::power(&[0.2, 0.4], 0.7);
        let g = Integrand::power(&[0.9, 0.1], 1.3);
        let (vf, vg) = (
            integrate_cellwise(&path, &f, &a).unwrap(),
            integrate_cellwise(&path, &g, &a).unwrap(),
        );
        // αf + βg as a grid table on the cell tips
        let cells = d.cells(4);
        let (bf, bg) = (f.bind(&d).unwrap(), g.bind(&d).unwrap());
        let values: Vec<f64> = (0..cells.len())
            .map(|i| {
                let tip = cells.tip(&d, i);
                2.0 * bf.eval(&tip) - 0.5 * bg.eval(&tip)
            })
            .collect();
        let combo = Integrand::GridTable { level: 4, values };
        let vc = integrate_cellwise(&path, &combo, &a).unwrap();
        assert!((vc - (2.0 * vf - 0.5 * vg)).abs() < 1e-10);

        let off = IndexSet::atom(&[0.3, 0.5]);
        assert!(integrate_cellwise(&path, &f, &off).is_err());
    }

    #[test]
    fn jump_integral_matches_hand_sum() {
        let d = unit_line();
        let m = Measure::lebesgue();
        let t =
            LevyTriplet::new(0.0, 0.0, LevyMeasureSpec::atoms(&[(2.0, 5.0), (-1.5, 2.0)])).unwrap();
        let path = sample_path(&t, &d, &m, 8, 0.1, 11, 0).unwrap();
        let f = Integrand::power(&[0.5], 0.5);
        let a = IndexSet::atom(&[0.75]);
        let got = integrate_jumps(&path, &f, &a).unwrap();
        let mut want = 0.0;
        for i in 0..path.jumps().len() {
            let s = path.jumps().coords(i).unwrap()[0];
            if s <= 0.75 {
                want += (s - 0.5).abs().sqrt() * path.jumps().sizes()[i];
            }
        }
        assert_eq!(got, want);

        // cross-check with the cellwise integrator: f is 1/2-Hölder, so
        // the difference per jump is at most (mesh step)^{1/2} |J|
        let cell = integrate_cellwise(&path, &f, &a).unwrap();
        let bound: f64 =
            path.jumps().sizes().iter().map(|j| j.abs()).sum::<f64>() * (2f64).powi(-4);
        assert!((cell - got).abs() <= bound + 1e-12);

        let gauss = LevyTriplet::new(0.0, 1.0, LevyMeasureSpec::zero()).unwrap();
        let gp = sample_path(&gauss, &d, &m, 4, 0.1, 1, 0).unwrap();
        assert!(matches!(
            integrate_jumps(&gp, &f, &a),
            Err(Error::NotPurelyPoissonian)
        ));
    }

    #[test]
    fn single_jump_with_compensator() {
        // one atom below 1 so the compensator is non-zero
        let d = unit_line();
        let m = Measure::lebesgue();
        let t = LevyTriplet::new(0.0, 0.0, LevyMeasureSpec::atoms(&[(0.5, 1.0)])).unwrap();
        let path = (0..)
            .map(|s| sample_path(&t, &d, &m, 10, 0.1, s, 0).unwrap())
            .find(|p| p.jumps().len() == 1)
            .unwrap();
        let f = Integrand::power(&[0.0], 1.0);
        let whole = IndexSet::atom(&[1.0]);
        let s = path.jumps().coords(0).unwrap()[0];
        let want = s * 0.5 - 0.5 * 0.5;
        let got = integrate_jumps(&path, &f, &whole).unwrap();
        assert!((got - want).abs() < 1e-12);
        let cell = integrate_cellwise(&path, &f, &whole).unwrap();
        assert!((cell - want).abs() < 0.5 * 2f64.powi(-10) + 1e-12);
    }

    #[test]
    fn y_path_structure() {
        let d = Domain::unit_box(2);
        let m = Measure::lebesgue();
        let nu = LevyMeasureSpec::atoms(&[(0.5, 40.0)]).plus(&LevyMeasureSpec::stable(1.3, 1.0));
        let t = LevyTriplet::new(0.2, 0.5, nu.unwrap()).unwrap();
        let mix = Integrand::SetMixture {
            center: vec![0.5, 0.5],
            lo: vec![0.0, 0.0],
            hi: vec![0.5, 1.0],
            a: 0.0,
            a_off: 1.0,
        };
        let y = sample_y(&t, &mix, &d, &m, 5, 0.05, 3, 1, DriftMode::Keep).unwrap();
        let f = mix.bind(&d).unwrap();
        let xj = y.x().jumps();
        let mut expected_sources = Vec::new();
        for i in 0..xj.len() {
            if f.eval(&xj.location(&d, i)) != 0.0 {
                expected_sources.push(i);
            }
        }
        assert_eq!(y.jump_sources(), expected_sources.as_slice());
        for (k, &i) in y.jump_sources().iter().enumerate() {
            let loc = xj.location(&d, i);
            assert_eq!(y.jumps().location(&d, k), loc);
            assert_eq!(y.jumps().sizes()[k], f.eval(&loc) * xj.sizes()[i]);
        }

        // f ≡ 1 reproduces X, f ≡ 0 gives zero
        let one =
            SamplePathY::from_path(y.x().clone(), &Integrand::one(), DriftMode::Keep).unwrap();
        for (a, b) in one
            .field()
            .increments()
            .iter()
            .zip(y.x().field().increments())
        {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = SamplePathY::from_path(
            y.x().clone(),
            &Integrand::Constant { c: 0.0 },
            DriftMode::Keep,
        )
        .unwrap();
        assert!(zero.field().increments().iter().all(|&v| v == 0.0));
        assert!(zero.jumps().is_empty());

        // additivity over a split
        let whole = d.extremal_rep(&IndexSet::atom(&[1.0, 1.0]), &[]);
        let left = d.extremal_rep(&IndexSet::atom(&[0.25, 1.0]), &[]);
        let right = d.extremal_rep(
            &IndexSet::atom(&[1.0, 1.0]),
            &[IndexSet::atom(&[0.25, 1.0])],
        );
        let sum = y.delta_y_union(&[left, right]).unwrap();
        assert!((sum - y.delta_y(&whole).unwrap()).abs() < 1e-10);
        assert_eq!(y.delta_y(&IncrementSet::empty()).unwrap(), 0.0);
    }

    #[test]
    fn cancel_mode_drops_drift() {
        let d = unit_line();
        let m = Measure::lebesgue();
        // integrable small jumps: no drift, no compensator
        let t = LevyTriplet::new(1.0, 0.0, LevyMeasureSpec::atoms(&[(0.5, 2.0)])).unwrap();
        let x = sample_path(&t, &d, &m, 6, 0.1, 2, 0).unwrap();
        let y = SamplePathY::from_path(x.clone(), &Integrand::one(), DriftMode::Cancel).unwrap();
        let jumps: f64 = x.jumps().sizes().iter().sum();
        assert!((y.y(&IndexSet::atom(&[1.0])).unwrap() - jumps).abs() < 1e-12);
        let kept = SamplePathY::from_path(x.clone(), &Integrand::one(), DriftMode::Keep).unwrap();
        assert!((kept.y(&IndexSet::atom(&[1.0])).unwrap() - (1.0 + jumps - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn single_cell_jump() {
        let d = unit_line();
        let m = Measure::lebesgue();
        let t = LevyTriplet::new(0.0, 0.0, LevyMeasureSpec::atoms(&[(2.0, 1.0)])).unwrap();
        let f = Integrand::power(&[0.0], 1.0);
        let y = (0..)
            .map(|s| sample_y(&t, &f, &d, &m, 6, 0.1, s, 0, DriftMode::Keep).unwrap())
            .find(|y| y.jumps().len() == 1)
            .unwrap();
        let k = y.jumps().cells()[0];
        let cell = y.field().cells().cell(&d, k);
        let s = y.jumps().coords(0).unwrap()[0];
        assert!((y.delta_y(&cell).unwrap() - s * 2.0).abs() < 1e-12);
    }
}
