//! Hölder-type regularity exponents estimated by log-log regression over
//! dyadic scales, the jump-based upper bound, and the theoretical
//! predictions they are compared against.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::indexing::{
    d_a, divergence_field, divergence_mesh, CellLayout, Domain, IndexSet, MetricKind, Point,
};
use crate::integral::Integrand;
use crate::levy::JumpList;
use crate::measure::{cell_center, delta_h, Measure};

/// A regularity exponent; `Infinite` is the `+∞` sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Exponent::Infinite
        } else {
            Exponent::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v:.4}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => s.serialize_f64(*v),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Exponent::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Holder,
    CExp,
    Localized,
    Pc,
}

/// Output of a log-log regression.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub method: Method,
    pub value: Exponent,
    /// Scale indices `j` (or mesh levels for `Pc`), coarse to fine.
    pub scales: Vec<u32>,
    /// `S_j` per scale.
    pub suprema: Vec<f64>,
    /// Scales kept in the final fit.
    pub used: Vec<u32>,
    pub r2: f64,
}

/// Mesh level used at scale `2^-j`: `min(j + margin, max_level)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshLadder {
    #[serde(default = "default_margin")]
    pub margin: u32,
    pub max_level: u32,
}

fn default_margin() -> u32 {
    3
}

impl MeshLadder {
    pub fn new(max_level: u32) -> Self {
        MeshLadder {
            margin: default_margin(),
            max_level,
        }
    }

    pub fn level(&self, j: u32) -> u32 {
        (j + self.margin).min(self.max_level)
    }
}

/// Least-squares slope and `r²` of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy <= 1e-24 * n {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, r2)
}

/// Fits `log2 y ~ slope · x` over scales ordered coarse to fine, dropping
/// up to two of the finest scales while that improves `r²`. Zero values
/// are skipped; a zero at the finest scale gives the infinite sentinel.
fn regress(
    method: Method,
    scales: Vec<u32>,
    xs: &[f64],
    sup: Vec<f64>,
) -> Result<ExponentEstimate> {
    let usable: Vec<usize> = (0..sup.len())
        .filter(|&i| sup[i] > 0.0 && sup[i].is_finite() && xs[i].is_finite())
        .collect();
    // h constant at the finest scale: the limit exponent is infinite
    if sup.last().is_some_and(|&s| s == 0.0) {
        return Ok(ExponentEstimate {
            method,
            value: Exponent::Infinite,
            scales,
            suprema: sup,
            used: Vec::new(),
            r2: 1.0,
        });
    }
    if usable.len() < 3 {
        return Err(Error::InsufficientScales(usable.len()));
    }
    let fit = |idx: &[usize]| {
        let x: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let y: Vec<f64> = idx.iter().map(|&i| sup[i].log2()).collect();
        linear_fit(&x, &y)
    };
    let mut keep = usable.len();
    let (mut slope, mut r2) = fit(&usable[..keep]);
    for _ in 0..2 {
        if keep <= 3 {
            break;
        }
        let (s, r) = fit(&usable[..keep - 1]);
        if r > r2 {
            keep -= 1;
            slope = s;
            r2 = r;
        } else {
            break;
        }
    }
    Ok(ExponentEstimate {
        method,
        value: Exponent::Finite(slope),
        used: usable[..keep].iter().map(|&i| scales[i]).collect(),
        scales,
        suprema: sup,
        r2,
    })
}

fn dyadic_fit(method: Method, js: &[u32], sup: Vec<f64>) -> Result<ExponentEstimate> {
    let xs: Vec<f64> = js.iter().map(|&j| -(j as f64)).collect();
    regress(method, js.to_vec(), &xs, sup)
}

fn check_scales(js: &[u32]) -> Result<()> {
    if js.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "scales must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Mesh atoms of `A_{n(j)}` in the open ball `B_A(A, 2^-j)`.
fn ball_atoms(
    domain: &Domain,
    a: &IndexSet,
    metric: &MetricKind,
    rho: f64,
    n: u32,
) -> Vec<IndexSet> {
    domain
        .mesh(n)
        .tips
        .into_iter()
        .map(IndexSet::Atom)
        .filter(|u| d_a(domain, u, a, metric) < rho)
        .collect()
}

/// Ball enumerations for the Hölder and `C`-exponents, reusable across
/// many set functions.
#[derive(Clone, Debug)]
pub struct BallPlan {
    a: IndexSet,
    js: Vec<u32>,
    balls: Vec<Vec<IndexSet>>,
    comparable: Vec<Vec<(usize, usize)>>,
}

impl BallPlan {
    pub fn new(
        domain: &Domain,
        a: &IndexSet,
        metric: &MetricKind,
        js: &[u32],
        ladder: &MeshLadder,
    ) -> Result<Self> {
        check_scales(js)?;
        let balls: Vec<Vec<IndexSet>> = js
            .iter()
            .map(|&j| ball_atoms(domain, a, metric, (-(j as f64)).exp2(), ladder.level(j)))
            .collect();
        Ok(BallPlan {
            a: a.clone(),
            js: js.to_vec(),
            balls,
            comparable: Vec::new(),
        })
    }

    /// Adds the comparable pairs `A_0 ⊆ A_1` of each ball, needed by
    /// [`BallPlan::c_exponent`].
    pub fn with_pairs(mut self, domain: &Domain) -> Self {
        self.comparable = self
            .balls
            .iter()
            .map(|ball| {
                let mut pairs = Vec::new();
                for (i, u) in ball.iter().enumerate() {
                    for (k, v) in ball.iter().enumerate() {
                        if i != k && domain.subset(u, v) {
                            pairs.push((i, k));
                        }
                    }
                }
                pairs
            })
            .collect();
        self
    }

    pub fn ball(&self, k: usize) -> &[IndexSet] {
        &self.balls[k]
    }

    /// `S_j = max_{A' ∈ A_n ∩ B(A, 2^-j)} |h(A) − h(A')|`.
    pub fn holder<H: Fn(&IndexSet) -> f64>(&self, h: H) -> Result<ExponentEstimate> {
        let ha = h(&self.a);
        let sup = self
            .balls
            .iter()
            .map(|ball| ball.iter().map(|u| (h(u) - ha).abs()).fold(0.0, f64::max))
            .collect();
        dyadic_fit(Method::Holder, &self.js, sup)
    }

    /// `S_j = max |h(A_1) − h(A_0)|` over `A_0 ⊆ A_1` in the ball.
    pub fn c_exponent<H: Fn(&IndexSet) -> f64>(&self, h: H) -> Result<ExponentEstimate> {
        if self.comparable.len() != self.balls.len() {
            return Err(Error::InvalidParameter(
                "ball plan built without pairs".into(),
            ));
        }
        let sup = self
            .balls
            .iter()
            .zip(&self.comparable)
            .map(|(ball, pairs)| {
                let vals: Vec<f64> = ball.iter().map(&h).collect();
                pairs
                    .iter()
                    .map(|&(i, k)| (vals[k] - vals[i]).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        dyadic_fit(Method::CExp, &self.js, sup)
    }
}

pub fn holder_exponent<H: Fn(&IndexSet) -> f64>(
    domain: &Domain,
    h: H,
    a: &IndexSet,
    metric: &MetricKind,
    js: &[u32],
    ladder: &MeshLadder,
) -> Result<ExponentEstimate> {
    BallPlan::new(domain, a, metric, js, ladder)?.holder(h)
}

pub fn c_exponent<H: Fn(&IndexSet) -> f64>(
    domain: &Domain,
    h: H,
    a: &IndexSet,
    metric: &MetricKind,
    js: &[u32],
    ladder: &MeshLadder,
) -> Result<ExponentEstimate> {
    BallPlan::new(domain, a, metric, js, ladder)?
        .with_pairs(domain)
        .c_exponent(h)
}

/// Increment sets admissible for the localized exponent at each scale,
/// stored as signed corner combinations of mesh atoms.
#[derive(Clone, Debug)]
pub struct LocalizedPlan {
    js: Vec<u32>,
    scales: Vec<LocalScale>,
}

#[derive(Clone, Debug)]
struct LocalScale {
    atoms: Vec<IndexSet>,
    /// `Δh(C) = Σ sign · h(atoms[k])` for every admissible `C`.
    sets: Vec<Vec<(usize, f64)>>,
}

impl LocalizedPlan {
    /// Box domains use the rectangles `(lo, hi]` on the level-`n(j)` grid,
    /// which lie in `C_{p-1}`; trees use the path segments `A(v) \ A(u)`.
    /// A set is admissible when it lies inside `B_T(t, 2^-j)` and all its
    /// constituents are within `2^-j` of `A(t)`.
    pub fn new(
        domain: &Domain,
        t: &Point,
        metric: &MetricKind,
        js: &[u32],
        ladder: &MeshLadder,
    ) -> Result<Self> {
        check_scales(js)?;
        domain.check_point(t)?;
        let a = IndexSet::Atom(t.clone());
        let scales = js
            .iter()
            .map(|&j| {
                let rho = (-(j as f64)).exp2();
                let n = ladder.level(j);
                match domain {
                    Domain::Box(b) => box_scale(domain, b.lattice(n).grid(), t, &a, metric, rho),
                    Domain::Tree(_) => tree_scale(domain, t, &a, metric, rho, n),
                }
            })
            .collect();
        Ok(LocalizedPlan {
            js: js.to_vec(),
            scales,
        })
    }

    pub fn set_counts(&self) -> Vec<usize> {
        self.scales.iter().map(|s| s.sets.len()).collect()
    }

    pub fn estimate<H: Fn(&IndexSet) -> f64>(&self, h: H) -> Result<ExponentEstimate> {
        let sup = self
            .scales
            .iter()
            .map(|sc| {
                let vals: Vec<f64> = sc.atoms.iter().map(&h).collect();
                sc.sets
                    .iter()
                    .map(|terms| terms.iter().map(|&(k, s)| s * vals[k]).sum::<f64>().abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        dyadic_fit(Method::Localized, &self.js, sup)
    }
}

fn box_scale(
    domain: &Domain,
    grid: &[f64],
    t: &Point,
    a: &IndexSet,
    metric: &MetricKind,
    rho: f64,
) -> LocalScale {
    let tc = t.coords().expect("box point");
    let p = tc.len();
    // grid indices within rho of t along each axis
    let ranges: Vec<(usize, usize)> = tc
        .iter()
        .map(|&x| {
            let lo = grid.partition_point(|&g| g <= x - rho);
            let hi = grid.partition_point(|&g| g < x + rho);
            (lo, hi)
        })
        .collect();
    let dims: Vec<usize> = ranges.iter().map(|(l, h)| h.saturating_sub(*l)).collect();
    let total: usize = dims.iter().product();
    if total == 0 {
        return LocalScale {
            atoms: Vec::new(),
            sets: Vec::new(),
        };
    }
    let index = |m: &[usize]| m.iter().zip(&dims).fold(0, |acc, (k, d)| acc * d + k);
    let coords = |m: &[usize]| -> Vec<f64> {
        m.iter()
            .zip(&ranges)
            .map(|(k, (l, _))| grid[l + k])
            .collect()
    };
    let mut atoms = Vec::with_capacity(total);
    let mut inside = Vec::with_capacity(total);
    let mut near = Vec::with_capacity(total);
    let mut multi = vec![0usize; p];
    for _ in 0..total {
        let c = coords(&multi);
        let atom = IndexSet::Atom(Point::Box(c.clone()));
        inside.push(domain.distance(&Point::Box(c), t) < rho);
        near.push(d_a(domain, &atom, a, metric) < rho);
        atoms.push(atom);
        for ax in (0..p).rev() {
            multi[ax] += 1;
            if multi[ax] < dims[ax] {
                break;
            }
            multi[ax] = 0;
        }
    }
    let corners = 1usize << p;
    let mut sets = Vec::new();
    let mut lo = vec![0usize; p];
    'outer: loop {
        // enumerate hi > lo componentwise
        let mut hi: Vec<usize> = lo.iter().map(|&l| l + 1).collect();
        if hi.iter().zip(&dims).all(|(h, d)| h < d) {
            'inner: loop {
                let mut terms = Vec::with_capacity(corners);
                let mut ok = true;
                let mut corner = vec![0usize; p];
                for mask in 0..corners {
                    let mut lowered = 0;
                    for ax in 0..p {
                        if mask & (1 << ax) != 0 {
                            corner[ax] = lo[ax];
                            lowered += 1;
                        } else {
                            corner[ax] = hi[ax];
                        }
                    }
                    let k = index(&corner);
                    if !inside[k] || (lowered <= 1 && !near[k]) {
                        ok = false;
                        break;
                    }
                    terms.push((k, if lowered % 2 == 0 { 1.0 } else { -1.0 }));
                }
                if ok {
                    sets.push(terms);
                }
                for ax in (0..p).rev() {
                    hi[ax] += 1;
                    if hi[ax] < dims[ax] {
                        continue 'inner;
                    }
                    hi[ax] = lo[ax] + 1;
                }
                break;
            }
        }
        for ax in (0..p).rev() {
            lo[ax] += 1;
            if lo[ax] + 1 < dims[ax] {
                continue 'outer;
            }
            lo[ax] = 0;
        }
        break;
    }
    LocalScale { atoms, sets }
}

fn tree_scale(
    domain: &Domain,
    t: &Point,
    a: &IndexSet,
    metric: &MetricKind,
    rho: f64,
    n: u32,
) -> LocalScale {
    let atoms: Vec<IndexSet> = domain
        .mesh(n)
        .tips
        .into_iter()
        .filter(|u| domain.distance(u, t) < rho)
        .map(IndexSet::Atom)
        .collect();
    let near: Vec<bool> = atoms
        .iter()
        .map(|u| d_a(domain, u, a, metric) < rho)
        .collect();
    let root_inside = domain.distance(&domain.zero(), t) < rho;
    let mut sets = Vec::new();
    for (k, v) in atoms.iter().enumerate() {
        if !near[k] {
            continue;
        }
        if root_inside && d_a(domain, v, &IndexSet::Empty, metric) > 0.0 {
            // A(v) itself, when the whole chain from the root is in the ball
            if d_a(domain, &IndexSet::Empty, a, metric) < rho {
                sets.push(vec![(k, 1.0)]);
            }
        }
        for (i, u) in atoms.iter().enumerate() {
            if i != k && near[i] && domain.subset(u, v) {
                sets.push(vec![(k, 1.0), (i, -1.0)]);
            }
        }
    }
    LocalScale { atoms, sets }
}

pub fn localized_exponent<H: Fn(&IndexSet) -> f64>(
    domain: &Domain,
    h: H,
    t: &Point,
    metric: &MetricKind,
    js: &[u32],
    ladder: &MeshLadder,
) -> Result<ExponentEstimate> {
    LocalizedPlan::new(domain, t, metric, js, ladder)?.estimate(h)
}

/// Above this value the pointwise continuity exponent is reported capped.
pub const PC_CAP: f64 = 16.0;

/// Slope of `log |Δh(C_n(t))|` against `log m(C_n(t))` over `levels`.
pub fn pc_exponent<H: Fn(&IndexSet) -> f64>(
    domain: &Domain,
    h: H,
    t: &Point,
    measure: &Measure,
    levels: &[u32],
) -> Result<ExponentEstimate> {
    check_scales(levels)?;
    let mut xs = Vec::with_capacity(levels.len());
    let mut sup = Vec::with_capacity(levels.len());
    for &n in levels {
        let c = domain.left_neighborhood(t, n)?;
        let m = measure.of_increment(domain, &c);
        if !(m > 0.0) {
            return Err(Error::DegenerateMass);
        }
        xs.push(m.log2());
        sup.push(delta_h(domain, &h, &c).abs());
    }
    let mut est = regress(Method::Pc, levels.to_vec(), &xs, sup)?;
    // vanishing faster than any power is reported at the cap
    if est.value.value() > PC_CAP {
        est.value = Exponent::Finite(PC_CAP);
    }
    Ok(est)
}

/// Computes `qd(s, A)` for jump locations. One-dimensional boxes use the
/// exact `d_A(A(s), A)`, trees the exact mesh minimax over all nodes, and
/// higher-dimensional boxes the level-`n` divergence field.
pub struct DivergenceOracle<'a> {
    domain: &'a Domain,
    a: IndexSet,
    metric: MetricKind,
    field: Option<crate::indexing::DivergenceField>,
}

impl<'a> DivergenceOracle<'a> {
    pub fn new(domain: &'a Domain, a: &IndexSet, metric: &MetricKind, level: u32) -> Self {
        let field = match domain {
            Domain::Box(b) if b.p() == 1 => None,
            Domain::Box(_) => Some(divergence_field(domain, a, level, metric)),
            Domain::Tree(tr) => Some(divergence_field(domain, a, tr.max_depth(), metric)),
        };
        DivergenceOracle {
            domain,
            a: a.clone(),
            metric: *metric,
            field,
        }
    }

    pub fn qd(&self, s: &Point) -> f64 {
        match &self.field {
            None => d_a(
                self.domain,
                &IndexSet::Atom(s.clone()),
                &self.a,
                &self.metric,
            ),
            Some(f) => f.at(self.domain, s),
        }
    }
}

/// Default `ρ_cut` for [`jump_upper_bound`].
pub const RHO_CUT: f64 = 0.125;

/// `min log|J_s| / log qd(s, A)` over jumps with `qd(s, A) <= rho_cut` and
/// `|J_s| < 1`, floored at zero.
pub fn jump_upper_bound(
    domain: &Domain,
    metric: &MetricKind,
    a: &IndexSet,
    jumps: &JumpList,
    rho_cut: f64,
    qd_level: u32,
) -> Result<Exponent> {
    let oracle = DivergenceOracle::new(domain, a, metric, qd_level);
    let mut best = f64::INFINITY;
    for i in 0..jumps.len() {
        let size = jumps.sizes()[i].abs();
        if !(size < 1.0) || size == 0.0 {
            continue;
        }
        let q = match jumps.coords(i) {
            Some(c) if domain.dim() == 1 && domain.as_box().is_some() => {
                d_a(domain, &IndexSet::atom(c), a, metric)
            }
            _ => oracle.qd(&jumps.location(domain, i)),
        };
        if q > rho_cut {
            continue;
        }
        let ratio = if q <= 0.0 { 0.0 } else { size.ln() / q.ln() };
        best = best.min(ratio.max(0.0));
    }
    Ok(Exponent::from_f64(best))
}

/// Masses of the irregular sets `L_{f,α}` and their complements in
/// victinies and metric balls, on grids of `α` and `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassCurves {
    pub alphas: Vec<f64>,
    pub rhos: Vec<f64>,
    /// `m(V(A, ρ))` per `ρ`.
    pub victiny: Vec<f64>,
    /// `m(B_T(t, ρ))` per `ρ`.
    pub ball: Vec<f64>,
    /// `[α][ρ]` masses of `L`, `L^∁`, `L'`, `L'^∁`.
    pub l: Vec<Vec<f64>>,
    pub l_c: Vec<Vec<f64>>,
    pub l_ball: Vec<Vec<f64>>,
    pub l_ball_c: Vec<Vec<f64>>,
    pub q_v: f64,
    pub q_b: f64,
    /// Dimension used for the `q` grid.
    pub dim: usize,
}

/// Slope of `log m` against `log ρ`, `None` when the mass vanishes at the
/// smallest radius (the set is eventually empty).
pub fn mass_slope(rhos: &[f64], masses: &[f64]) -> Option<f64> {
    let small = rhos
        .iter()
        .zip(masses)
        .min_by(|a, b| a.0.total_cmp(b.0))
        .map(|(_, m)| *m)?;
    if !(small > 0.0) {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = rhos
        .iter()
        .zip(masses)
        .filter(|(_, m)| **m > 0.0)
        .map(|(r, m)| (r.ln(), m.ln()))
        .unzip();
    if x.len() < 2 {
        return None;
    }
    Some(linear_fit(&x, &y).0)
}

/// `|f| > d^α`, read as its limit `|f| >= 1` at `α = 0` so that the grid
/// point `α = 0` stands for `α → 0+`.
fn irregular(fv: f64, d: f64, alpha: f64) -> bool {
    if alpha == 0.0 {
        fv >= 1.0
    } else {
        fv > d.powf(alpha)
    }
}

/// Cell quadrature of the victiny and ball masses at level `quad_level`:
/// `qd` is taken at cell tips, `f` and `d_T` at cell centres.
#[allow(clippy::too_many_arguments)]
pub fn mass_curves(
    f: &Integrand,
    domain: &Domain,
    measure: &Measure,
    metric: &MetricKind,
    t: &Point,
    alphas: &[f64],
    rhos: &[f64],
    quad_level: u32,
) -> Result<MassCurves> {
    domain.check_point(t)?;
    if rhos.len() < 2 || rhos.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParameter(
            "need at least two positive radii".into(),
        ));
    }
    let f = f.bind(domain)?;
    let a = IndexSet::Atom(t.clone());
    let field = divergence_field(domain, &a, quad_level, metric);
    let cells = &field.cells;
    let masses = measure.cell_masses(domain, cells);
    let rho_max = rhos.iter().cloned().fold(0.0, f64::max);
    let nr = rhos.len();
    let na = alphas.len();
    let mut victiny = vec![0.0; nr];
    let mut ball = vec![0.0; nr];
    let mut l = vec![vec![0.0; nr]; na];
    let mut l_ball = vec![vec![0.0; nr]; na];
    for (i, &m) in masses.iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        let centre = match cells {
            CellLayout::Box(lat) => Point::Box(cell_center(lat, i)),
            CellLayout::Tree { .. } => cells.tip(domain, i),
        };
        let qd = field.values[i];
        let dt = domain.distance(&centre, t);
        if qd >= rho_max && dt >= rho_max {
            continue;
        }
        let fv = f.eval(&centre).abs();
        if !fv.is_finite() {
            return Err(Error::Unbounded);
        }
        for (r, &rho) in rhos.iter().enumerate() {
            if qd < rho {
                victiny[r] += m;
                for (k, &al) in alphas.iter().enumerate() {
                    if irregular(fv, qd, al) {
                        l[k][r] += m;
                    }
                }
            }
            if dt < rho {
                ball[r] += m;
                for (k, &al) in alphas.iter().enumerate() {
                    if irregular(fv, dt, al) {
                        l_ball[k][r] += m;
                    }
                }
            }
        }
    }
    let l_c = l
        .iter()
        .map(|row| {
            row.iter()
                .zip(&victiny)
                .map(|(x, v)| (v - x).max(0.0))
                .collect()
        })
        .collect();
    let l_ball_c = l_ball
        .iter()
        .map(|row| {
            row.iter()
                .zip(&ball)
                .map(|(x, v)| (v - x).max(0.0))
                .collect()
        })
        .collect();
    let q_v = mass_slope(rhos, &victiny).unwrap_or(f64::NAN);
    let q_b = mass_slope(rhos, &ball).unwrap_or(f64::NAN);
    Ok(MassCurves {
        alphas: alphas.to_vec(),
        rhos: rhos.to_vec(),
        victiny,
        ball,
        l,
        l_c,
        l_ball,
        l_ball_c,
        q_v,
        q_b,
        dim: domain.dim(),
    })
}

/// Width of the guard band used to decide grid membership.
pub const GUARD: f64 = 0.1;

/// Theoretical bounds for `α_Y(A)` (victiny) and `α_{Y,d_T}(A)` (ball).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub lower: Exponent,
    pub upper: Exponent,
    pub lower_loc: Exponent,
    pub upper_loc: Exponent,
}

fn q_grid(dim: usize) -> Vec<f64> {
    (1..=(8 * dim)).map(|k| 0.25 * k as f64).collect()
}

fn bounds_from(
    alphas: &[f64],
    rhos: &[f64],
    l: &[Vec<f64>],
    l_c: &[Vec<f64>],
    beta: f64,
    qs: &[f64],
) -> (Exponent, Exponent) {
    if beta <= 0.0 {
        return (Exponent::Infinite, Exponent::Infinite);
    }
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for (k, &al) in alphas.iter().enumerate() {
        let e_l = mass_slope(rhos, &l[k]);
        let e_c = mass_slope(rhos, &l_c[k]);
        for &q in qs {
            // liminf m(L)/ρ^q > 0
            if e_l.is_some_and(|e| e <= q + GUARD) {
                upper = upper.min(q / beta + al);
            }
            if e_l.is_some_and(|e| e < q - GUARD) {
                continue;
            }
            for &q2 in qs {
                // limsup of both ratios finite
                if e_c.is_none_or(|e| e >= q2 - GUARD) {
                    lower = lower.max((q / beta).min(q2 / beta + al));
                }
            }
        }
    }
    (
        Exponent::from_f64(lower.max(0.0)),
        Exponent::from_f64(upper),
    )
}

/// Evaluates the sup/inf bounds over the `(α, q, q')` grid, with `q, q'`
/// on `{0.25, 0.5, …, 2p}` and membership decided by fitted mass slopes
/// within a guard band of [`GUARD`].
pub fn predict_bounds(curves: &MassCurves, beta: f64) -> Result<Bounds> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta {beta}")));
    }
    let qs = q_grid(curves.dim);
    let (lower, upper) = bounds_from(
        &curves.alphas,
        &curves.rhos,
        &curves.l,
        &curves.l_c,
        beta,
        &qs,
    );
    let (lower_loc, upper_loc) = bounds_from(
        &curves.alphas,
        &curves.rhos,
        &curves.l_ball,
        &curves.l_ball_c,
        beta,
        &qs,
    );
    Ok(Bounds {
        lower,
        upper,
        lower_loc,
        upper_loc,
    })
}

/// `α_Y(t) = 1/β + a · 1{f(t) = 0}` on the half-line, `a` the local power
/// of the integrand at `t`.
pub fn predict_1d(f: &Integrand, domain: &Domain, t: &Point, beta: f64) -> Result<Exponent> {
    if domain.as_box().is_none_or(|b| b.p() != 1) {
        return Err(Error::DomainMismatch("one-dimensional box required".into()));
    }
    if beta <= 0.0 {
        return Ok(Exponent::Infinite);
    }
    let bound = f.bind(domain)?;
    let vanishes = bound.eval(t) == 0.0;
    let a = match f {
        Integrand::PowerDist { exponent, .. } => *exponent,
        Integrand::SetMixture {
            lo, hi, a, a_off, ..
        } => {
            let x = t.coords().map_or(f64::NAN, |c| c[0]);
            if lo[0] <= x && x <= hi[0] {
                *a
            } else {
                *a_off
            }
        }
        _ => 0.0,
    };
    Ok(Exponent::Finite(
        1.0 / beta + if vanishes { a } else { 0.0 },
    ))
}

/// Empirical `q`-quantile by linear interpolation between order
/// statistics; `Infinite` entries sort last.
pub fn quantile(values: &[Exponent], q: f64) -> Option<Exponent> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|e| e.value()).collect();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    let x = if frac == 0.0 || v[i] == v[i + 1] {
        v[i]
    } else {
        v[i] + frac * (v[i + 1] - v[i])
    };
    Some(Exponent::from_f64(x))
}

/// Median, `Infinite` entries sorting last.
pub fn median(values: &[Exponent]) -> Option<Exponent> {
    quantile(values, 0.5)
}

/// `qd` at a point through the exact mesh minimax, for callers without a
/// precomputed oracle.
pub fn qd_at(domain: &Domain, s: &Point, a: &IndexSet, n: u32, metric: &MetricKind) -> f64 {
    divergence_mesh(domain, s, a, n, metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexing::TreeSpec;

    fn line() -> Domain {
        Domain::unit_box(1)
    }

    fn tip1(a: &IndexSet) -> f64 {
        a.tip().and_then(Point::coords).map_or(0.0, |c| c[0])
    }

    fn ladder() -> MeshLadder {
        MeshLadder::new(16)
    }

    const JS: [u32; 8] = [3, 4, 5, 6, 7, 8, 9, 10];

    #[test]
    fn holder_on_power_functions() {
        let d = line();
        let m = MetricKind::lebesgue();
        let a = IndexSet::atom(&[0.5]);
        for expo in [0.25, 0.5, 1.0] {
            let h = |s: &IndexSet| (tip1(s) - 0.5).abs().powf(expo);
            let e = holder_exponent(&d, h, &a, &m, &JS, &ladder()).unwrap();
            assert!((e.value.value() - expo).abs() < 0.1, "{expo}: {:?}", e);
            assert!(e.r2 >= 0.98);
            let c = c_exponent(&d, h, &a, &m, &JS, &ladder()).unwrap();
            assert!((c.value.value() - e.value.value()).abs() < 0.1);
            assert!(c.r2 >= 0.98);
            let l = localized_exponent(&d, h, &Point::Box(vec![0.5]), &m, &JS, &ladder()).unwrap();
            assert!((l.value.value() - expo).abs() < 0.1, "{expo}: {:?}", l);
            assert!(l.value.value() >= e.value.value() - 0.15);
        }
        let lebesgue = |s: &IndexSet| tip1(s);
        let e = holder_exponent(&d, lebesgue, &a, &m, &JS, &ladder()).unwrap();
        assert!(e.value.value() >= 1.0 - 1e-9);
    }

    #[test]
    fn sentinels_and_errors() {
        let d = line();
        let m = MetricKind::lebesgue();
        let a = IndexSet::atom(&[0.5]);
        let c = c_exponent(&d, |_: &IndexSet| 3.0, &a, &m, &JS, &ladder()).unwrap();
        assert_eq!(c.value, Exponent::Infinite);
        let l = localized_exponent(
            &d,
            |_: &IndexSet| 0.0,
            &Point::Box(vec![0.5]),
            &m,
            &JS,
            &ladder(),
        )
        .unwrap();
        assert_eq!(l.value, Exponent::Infinite);
        let r = holder_exponent(&d, |s: &IndexSet| tip1(s) - 0.5, &a, &m, &[3, 4], &ladder());
        assert!(matches!(r, Err(Error::InsufficientScales(2))));
        // locally constant: nonzero at the coarsest scale only
        let step = |s: &IndexSet| if tip1(s) > 0.75 { 1.0 } else { 0.0 };
        let e = holder_exponent(&d, step, &a, &m, &[1, 2, 3, 4], &ladder()).unwrap();
        assert_eq!(e.suprema[0], 1.0);
        assert_eq!(e.value, Exponent::Infinite);
        assert_eq!(
            serde_json::to_string(&Exponent::Infinite).unwrap(),
            "\"inf\""
        );
        let back: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(back, Exponent::Infinite);
    }

    #[test]
    fn spike_cell_gives_zero() {
        // additive h with a unit mass on the cell right above A
        let d = line();
        let m = MetricKind::lebesgue();
        let a = IndexSet::atom(&[0.5]);
        let h = |s: &IndexSet| if tip1(s) > 0.5 { 1.0 } else { 0.0 } + tip1(s);
        let c = c_exponent(&d, h, &a, &m, &JS, &ladder()).unwrap();
        assert!(c.value.value().abs() < 0.1, "{c:?}");
    }

    #[test]
    fn pc_exponent_cases() {
        let d = line();
        let lm = Measure::lebesgue();
        let t = Point::Box(vec![0.3]);
        let levels: Vec<u32> = (4..=12).collect();
        let e = pc_exponent(&d, |s: &IndexSet| tip1(s), &t, &lm, &levels).unwrap();
        assert!((e.value.value() - 1.0).abs() < 1e-9);
        let jump = |s: &IndexSet| tip1(s) + if tip1(s) >= 0.3 { 2.0 } else { 0.0 };
        let e = pc_exponent(&d, jump, &t, &lm, &levels).unwrap();
        assert!(e.value.value().abs() < 0.1);
        let flat = |s: &IndexSet| {
            let x = tip1(s) - 0.3;
            if x == 0.0 {
                0.0
            } else {
                x.signum() * (-1.0 / x.abs()).exp()
            }
        };
        let e = pc_exponent(&d, flat, &t, &lm, &levels).unwrap();
        assert!(e.value.value() >= 5.0);
        assert!(e.value.value() <= PC_CAP);
        for expo in [0.25, 0.5] {
            let h = |s: &IndexSet| (tip1(s) - 0.3).abs().powf(expo);
            let e = pc_exponent(&d, h, &t, &lm, &levels).unwrap();
            assert!((e.value.value() - expo).abs() < 0.1, "{e:?}");
        }
    }

    #[test]
    fn radial_cone_localized_2d() {
        let d = Domain::unit_box(2);
        let m = MetricKind::lebesgue();
        let t = Point::Box(vec![0.5, 0.5]);
        // h(A(s)) = |s − t| has rectangular increments of order ρ
        let h = |s: &IndexSet| {
            let c = s.tip().and_then(Point::coords).unwrap();
            d.distance(&Point::Box(c.to_vec()), &t)
        };
        let js = [2, 3, 4, 5, 6];
        let e = localized_exponent(&d, h, &t, &m, &js, &MeshLadder::new(10)).unwrap();
        assert!((e.value.value() - 1.0).abs() < 0.1, "{e:?}");
    }

    #[test]
    fn jump_bound_arithmetic() {
        let d = line();
        let m = MetricKind::lebesgue();
        let a = IndexSet::atom(&[0.5]);
        let nu = crate::levy::LevyMeasureSpec::atoms(&[(1.0 / 16.0, 1.0)]);
        let t = crate::levy::LevyTriplet::new(0.0, 0.0, nu).unwrap();
        let path = (0..)
            .map(|s| crate::levy::sample_path(&t, &d, &Measure::lebesgue(), 4, 0.1, s, 0).unwrap())
            .find(|p| p.jumps().len() == 1)
            .unwrap();
        let s = path.jumps().coords(0).unwrap()[0];
        let q = (s - 0.5).abs();
        let got = jump_upper_bound(&d, &m, &a, path.jumps(), 1.0, 10).unwrap();
        let want = (1.0f64 / 16.0).ln() / q.ln();
        assert!((got.value() - want.max(0.0)).abs() < 1e-12);
        // size 2^-4 at distance 2^-2 gives 2
        assert!(((1.0f64 / 16.0).ln() / 0.25f64.ln() - 2.0).abs() < 1e-12);

        let big = crate::levy::LevyMeasureSpec::atoms(&[(2.0, 30.0)]);
        let t = crate::levy::LevyTriplet::new(0.0, 0.0, big).unwrap();
        let path = crate::levy::sample_path(&t, &d, &Measure::lebesgue(), 4, 0.1, 1, 0).unwrap();
        assert!(!path.jumps().is_empty());
        let got = jump_upper_bound(&d, &m, &a, path.jumps(), RHO_CUT, 10).unwrap();
        assert_eq!(got, Exponent::Infinite);
    }

    #[test]
    fn mass_curve_scaling() {
        let m = Measure::lebesgue();
        let metric = MetricKind::lebesgue();
        let alphas = [0.0, 0.5, 1.0];
        let rhos: Vec<f64> = (3..=6).map(|k| (-(k as f64)).exp2()).collect();

        let d1 = line();
        let c = mass_curves(
            &Integrand::one(),
            &d1,
            &m,
            &metric,
            &Point::Box(vec![0.5]),
            &alphas,
            &rhos,
            12,
        )
        .unwrap();
        assert!(
            (c.q_v - 1.0).abs() < 0.05 && (c.q_b - 1.0).abs() < 0.05,
            "{} {}",
            c.q_v,
            c.q_b
        );
        // f ≡ 1 exceeds qd^α inside the victiny
        for k in 0..alphas.len() {
            for r in 0..rhos.len() {
                assert!((c.l[k][r] - c.victiny[r]).abs() < 1e-12);
            }
        }

        let d2 = Domain::unit_box(2);
        let t = Point::Box(vec![0.5, 0.5]);
        let c = mass_curves(&Integrand::one(), &d2, &m, &metric, &t, &alphas, &rhos, 9).unwrap();
        assert!((c.q_v - 1.0).abs() < 0.15, "q_v {}", c.q_v);
        assert!((c.q_b - 2.0).abs() < 0.15, "q_b {}", c.q_b);
        for r in 0..rhos.len() {
            for k in 0..alphas.len() {
                assert!((c.l[k][r] + c.l_c[k][r] - c.victiny[r]).abs() < 1e-12);
                assert!((c.l_ball[k][r] + c.l_ball_c[k][r] - c.ball[r]).abs() < 1e-12);
            }
            if r > 0 {
                assert!(c.victiny[r] <= c.victiny[r - 1] && c.ball[r] <= c.ball[r - 1]);
            }
        }
    }

    #[test]
    fn predictions() {
        let m = Measure::lebesgue();
        let metric = MetricKind::lebesgue();
        let alphas: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let rhos: Vec<f64> = (3..=6).map(|k| (-(k as f64)).exp2()).collect();
        let d = line();
        let t = Point::Box(vec![0.5]);
        let c = mass_curves(&Integrand::one(), &d, &m, &metric, &t, &alphas, &rhos, 12).unwrap();
        let b = predict_bounds(&c, 1.5).unwrap();
        assert!((b.lower.value() - 2.0 / 3.0).abs() < 1e-9, "{b:?}");
        assert!((b.upper.value() - 2.0 / 3.0).abs() < 1e-9, "{b:?}");
        let b0 = predict_bounds(&c, 0.0).unwrap();
        assert_eq!(b0.upper, Exponent::Infinite);
        assert_eq!(b0.lower, Exponent::Infinite);

        let f = Integrand::power(&[0.5], 0.5);
        let c = mass_curves(&f, &d, &m, &metric, &t, &alphas, &rhos, 12).unwrap();
        let b = predict_bounds(&c, 1.5).unwrap();
        assert!(
            (b.upper.value() - (2.0 / 3.0 + 0.5)).abs() < 0.1 + 1e-9,
            "{b:?}"
        );
        assert!(
            (b.lower.value() - (2.0 / 3.0 + 0.5)).abs() < 0.1 + 1e-9,
            "{b:?}"
        );

        assert!(
            (predict_1d(&Integrand::one(), &d, &t, 1.5).unwrap().value() - 2.0 / 3.0).abs() < 1e-12
        );
        assert!((predict_1d(&f, &d, &t, 1.5).unwrap().value() - (2.0 / 3.0 + 0.5)).abs() < 1e-12);
        let off = Point::Box(vec![0.25]);
        assert!((predict_1d(&f, &d, &off, 1.5).unwrap().value() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(predict_1d(&f, &d, &t, 0.0).unwrap(), Exponent::Infinite);
    }

    #[test]
    fn tree_localized_and_holder() {
        let mut chain = TreeSpec {
            length: 1.0,
            children: vec![],
        };
        for _ in 0..12 {
            chain = TreeSpec {
                length: 1.0,
                children: vec![chain],
            };
        }
        let d = Domain::new_tree(vec![chain]).unwrap();
        let m = MetricKind::symm_diff(Measure::TreeCounting);
        let t = Point::Tree(vec![1; 6]);
        let a = IndexSet::Atom(t.clone());
        let h = |s: &IndexSet| {
            s.tip()
                .and_then(Point::node)
                .map_or(0.0, |p| p.len() as f64)
        };
        // scales resolve only up to node spacing: check the estimators run
        let e = holder_exponent(&d, h, &a, &m, &[0, 1, 2], &MeshLadder::new(13));
        assert!(e.is_ok());
        let l = localized_exponent(&d, h, &t, &m, &[0, 1, 2], &MeshLadder::new(13));
        assert!(l.is_ok());
    }
}
