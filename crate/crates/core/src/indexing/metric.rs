use serde::{Deserialize, Serialize};

use super::domain::{CellLayout, Domain};
use super::sets::{IncrementSet, IndexSet, Point};
use crate::error::{Error, Result};
use crate::measure::Measure;

/// A metric on the collection.
///
/// `MeasureSymmDiff` is `d_m(A, A') = m(A △ A')`. `HausdorffTips` is the
/// Hausdorff distance between the sets themselves (Euclidean on boxes, edge
/// length along the tree).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricKind {
    MeasureSymmDiff { measure: Measure },
    HausdorffTips,
}

impl MetricKind {
    pub fn symm_diff(measure: Measure) -> Self {
        MetricKind::MeasureSymmDiff { measure }
    }

    pub fn lebesgue() -> Self {
        MetricKind::symm_diff(Measure::lebesgue())
    }
}

/// `d_A(A, A')`.
pub fn d_a(domain: &Domain, a: &IndexSet, b: &IndexSet, metric: &MetricKind) -> f64 {
    match metric {
        MetricKind::MeasureSymmDiff { measure } => {
            let inter = domain.intersect(a, b);
            let d = measure.of_set(domain, a) + measure.of_set(domain, b)
                - 2.0 * measure.of_set(domain, &inter);
            d.max(0.0)
        }
        MetricKind::HausdorffTips => hausdorff(domain, a, b),
    }
}

fn hausdorff(domain: &Domain, a: &IndexSet, b: &IndexSet) -> f64 {
    match (a, b) {
        (IndexSet::Empty, IndexSet::Empty) => 0.0,
        (IndexSet::Empty, _) | (_, IndexSet::Empty) => f64::INFINITY,
        _ => match domain {
            Domain::Box(_) => {
                let whole = domain.whole();
                let s = a
                    .tip()
                    .or(whole.tip())
                    .and_then(Point::coords)
                    .unwrap_or(&[]);
                let t = b
                    .tip()
                    .or(whole.tip())
                    .and_then(Point::coords)
                    .unwrap_or(&[]);
                let up = |x: &[f64], y: &[f64]| {
                    x.iter()
                        .zip(y)
                        .map(|(u, v)| (u - v).max(0.0).powi(2))
                        .sum::<f64>()
                        .sqrt()
                };
                up(s, t).max(up(t, s))
            }
            Domain::Tree(tr) => {
                // farthest point of X from the ancestor chain A(t) is at
                // height(x) - height(x ∧ t)
                let excess = |x: usize, t: &IndexSet| -> f64 {
                    match t {
                        IndexSet::Whole => 0.0,
                        IndexSet::Atom(Point::Tree(p)) => {
                            let common =
                                tr.path(x).iter().zip(p).take_while(|(u, v)| u == v).count();
                            let meet = tr.id(&tr.path(x)[..common]).unwrap_or(0);
                            tr.height(x) - tr.height(meet)
                        }
                        _ => f64::INFINITY,
                    }
                };
                let sup = |x: &IndexSet, y: &IndexSet| -> f64 {
                    match x {
                        IndexSet::Whole => (0..tr.len()).map(|i| excess(i, y)).fold(0.0, f64::max),
                        IndexSet::Atom(Point::Tree(p)) => {
                            tr.id(p).map_or(f64::INFINITY, |i| excess(i, y))
                        }
                        _ => f64::INFINITY,
                    }
                };
                sup(a, b).max(sup(b, a))
            }
        },
    }
}

/// `d_C`: Hausdorff distance between the constituent lists of the extremal
/// representations, measured with `d_A`.
pub fn d_c(domain: &Domain, c: &IncrementSet, c2: &IncrementSet, metric: &MetricKind) -> f64 {
    let left: Vec<&IndexSet> = c.constituents().collect();
    let right: Vec<&IndexSet> = c2.constituents().collect();
    let directed = |x: &[&IndexSet], y: &[&IndexSet]| {
        x.iter()
            .map(|a| {
                y.iter()
                    .map(|b| d_a(domain, a, b, metric))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(&left, &right).max(directed(&right, &left))
}

/// The discretized victiny `V_n(A, ρ) = V̄_n \ V̲_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Victiny {
    /// Maximal elements of `A_n ∩ B(A, ρ)`.
    pub upper: Vec<IndexSet>,
    /// Intersection of all elements of `A_n ∩ B(A, ρ)`.
    pub lower: IndexSet,
}

impl Victiny {
    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub fn contains(&self, domain: &Domain, s: &Point) -> bool {
        self.upper.iter().any(|a| domain.contains(a, s)) && !domain.contains(&self.lower, s)
    }

    /// The region as a (possibly overlapping) list of increment sets.
    pub fn regions(&self, domain: &Domain) -> Vec<IncrementSet> {
        self.upper
            .iter()
            .map(|a| domain.extremal_rep(a, std::slice::from_ref(&self.lower)))
            .filter(|c| !c.is_empty())
            .collect()
    }
}

fn tip_rank(t: &Point) -> f64 {
    match t {
        Point::Box(c) => c.iter().sum(),
        Point::Tree(p) => p.len() as f64,
    }
}

/// `V_n(A, ρ)`. Non-positive radii give the empty region.
pub fn victiny_n(domain: &Domain, a: &IndexSet, rho: f64, n: u32, metric: &MetricKind) -> Victiny {
    let empty = Victiny {
        upper: Vec::new(),
        lower: IndexSet::Empty,
    };
    if !(rho > 0.0) {
        return empty;
    }
    let mut ball: Vec<Point> = domain
        .mesh(n)
        .tips
        .into_iter()
        .filter(|u| d_a(domain, &IndexSet::Atom(u.clone()), a, metric) < rho)
        .collect();
    if ball.is_empty() {
        return empty;
    }
    let mut lower = ball[0].clone();
    for u in &ball[1..] {
        lower = domain.meet(&lower, u).expect("same domain");
    }
    // anything dominating u has strictly larger rank, so it is seen first
    ball.sort_by(|x, y| tip_rank(y).total_cmp(&tip_rank(x)));
    let mut upper: Vec<Point> = Vec::new();
    for u in ball {
        if !upper.iter().any(|v| domain.leq(&u, v).unwrap_or(false)) {
            upper.push(u);
        }
    }
    Victiny {
        upper: upper.into_iter().map(IndexSet::Atom).collect(),
        lower: IndexSet::Atom(lower),
    }
}

/// Result of the divergence search: `qd ∈ [lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Divergence {
    pub lo: f64,
    pub hi: f64,
    /// False when the point never entered the victiny at the finest level;
    /// `lo` is then only a lower bound and `hi` is infinite.
    pub resolved: bool,
}

impl Divergence {
    pub fn value(&self) -> f64 {
        if self.resolved {
            0.5 * (self.lo + self.hi)
        } else {
            f64::INFINITY
        }
    }
}

/// `qd(t, A)` by bisection over `ρ` of the predicate `t ∈ V_{n_max}(A, ρ)`.
pub fn divergence(
    domain: &Domain,
    t: &Point,
    a: &IndexSet,
    metric: &MetricKind,
    n_max: u32,
    tol: f64,
) -> Result<Divergence> {
    domain.check_point(t)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol}")));
    }
    let mesh: Vec<(Point, f64)> = domain
        .mesh(n_max)
        .tips
        .into_iter()
        .map(|u| {
            let d = d_a(domain, &IndexSet::Atom(u.clone()), a, metric);
            (u, d)
        })
        .collect();
    // t ∈ V̄ \ V̲ iff some ball element contains t and some does not
    let member = |rho: f64| {
        let mut inside = false;
        let mut outside = false;
        for (u, d) in &mesh {
            if *d < rho {
                if domain.leq(t, u).unwrap_or(false) {
                    inside = true;
                } else {
                    outside = true;
                }
                if inside && outside {
                    return true;
                }
            }
        }
        false
    };
    let reach = mesh.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    let mut hi = reach + tol;
    if !member(hi) {
        return Ok(Divergence {
            lo: reach,
            hi: f64::INFINITY,
            resolved: false,
        });
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if member(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Divergence {
        lo,
        hi,
        resolved: true,
    })
}

/// Closed form of the level-`n` divergence:
/// `max(min_{u: t ≼ u} d(A(u), A), min_{u: t ⋠ u} d(A(u), A))` over mesh
/// tips, which is exactly the infimum the bisection in [`divergence`]
/// brackets.
pub fn divergence_mesh(
    domain: &Domain,
    t: &Point,
    a: &IndexSet,
    n: u32,
    metric: &MetricKind,
) -> f64 {
    let mut inside = f64::INFINITY;
    let mut outside = f64::INFINITY;
    for u in domain.mesh(n).tips {
        let d = d_a(domain, &IndexSet::Atom(u.clone()), a, metric);
        if domain.leq(t, &u).unwrap_or(false) {
            inside = inside.min(d);
        } else {
            outside = outside.min(d);
        }
    }
    inside.max(outside)
}

/// Level-`n` divergence to a fixed `A` evaluated at every mesh tip.
#[derive(Clone, Debug)]
pub struct DivergenceField {
    pub cells: CellLayout,
    pub values: Vec<f64>,
}

impl DivergenceField {
    /// Divergence at the tip of the cell containing `s`.
    pub fn at(&self, domain: &Domain, s: &Point) -> f64 {
        self.cells
            .locate(domain, s)
            .map_or(f64::INFINITY, |i| self.values[i])
    }
}

/// [`divergence_mesh`] at every tip of `A_n`. On boxes this is linear in
/// the mesh size: the "inside" minimum is a suffix minimum over the upper
/// orthant, the "outside" minimum a prefix minimum along each axis.
pub fn divergence_field(
    domain: &Domain,
    a: &IndexSet,
    n: u32,
    metric: &MetricKind,
) -> DivergenceField {
    let cells = domain.cells(n);
    let values = match &cells {
        CellLayout::Box(lattice) => {
            let m = lattice.axis_len();
            let p = lattice.p();
            let dist: Vec<f64> = (0..lattice.len())
                .map(|i| {
                    d_a(
                        domain,
                        &IndexSet::Atom(Point::Box(lattice.tip_coords(i))),
                        a,
                        metric,
                    )
                })
                .collect();
            let mut inside = dist.clone();
            let mut stride = 1;
            for _ in 0..p {
                for i in (0..inside.len()).rev() {
                    if (i / stride) % m + 1 < m {
                        inside[i] = inside[i].min(inside[i + stride]);
                    }
                }
                stride *= m;
            }
            // per axis: min of dist over the hyperplane slab u_axis <= k
            let mut axis_prefix = vec![vec![f64::INFINITY; m]; p];
            for (i, &d) in dist.iter().enumerate() {
                let multi = lattice.multi(i);
                for (ax, &k) in multi.iter().enumerate() {
                    axis_prefix[ax][k] = axis_prefix[ax][k].min(d);
                }
            }
            for pre in axis_prefix.iter_mut() {
                for k in 1..m {
                    pre[k] = pre[k].min(pre[k - 1]);
                }
            }
            (0..lattice.len())
                .map(|i| {
                    let multi = lattice.multi(i);
                    let outside = multi
                        .iter()
                        .enumerate()
                        .filter(|(_, &k)| k > 0)
                        .map(|(ax, &k)| axis_prefix[ax][k - 1])
                        .fold(f64::INFINITY, f64::min);
                    inside[i].max(outside)
                })
                .collect()
        }
        CellLayout::Tree { .. } => (0..cells.len())
            .map(|i| divergence_mesh(domain, &cells.tip(domain, i), a, n, metric))
            .collect(),
    };
    DivergenceField { cells, values }
}

/// An increasing geodesic from `a0` to `a1` sampled at the dyadics of order
/// `depth`, built by recursive midpoint bisection.
///
/// On boxes the midpoints are searched along the straight tip path
/// `u(x) = tip0 + x (tip1 - tip0)`. On trees the path is the chain of nodes
/// between the two tips, and each dyadic point takes the node whose distance
/// from `a0` is closest to the target.
pub fn geodesic(
    domain: &Domain,
    a0: &IndexSet,
    a1: &IndexSet,
    metric: &MetricKind,
    depth: u32,
) -> Result<Vec<IndexSet>> {
    if !domain.subset(a0, a1) || domain.subset(a1, a0) {
        return Err(Error::NotSubset(a0.to_string(), a1.to_string()));
    }
    let total = d_a(domain, a0, a1, metric);
    if !(total > 0.0) {
        return Err(Error::ZeroDistance);
    }
    let count = 1usize << depth;
    match domain {
        Domain::Box(b) => {
            let start = match a0 {
                IndexSet::Empty => vec![0.0; b.p()],
                _ => a0.tip().and_then(Point::coords).unwrap_or(&[]).to_vec(),
            };
            let end = a1
                .tip()
                .and_then(Point::coords)
                .ok_or_else(|| Error::InvalidParameter("geodesic endpoint".into()))?
                .to_vec();
            let at = |x: f64| -> IndexSet {
                if x == 0.0 {
                    return a0.clone();
                }
                if x == 1.0 {
                    return a1.clone();
                }
                IndexSet::Atom(Point::Box(
                    start
                        .iter()
                        .zip(&end)
                        .map(|(s, e)| s + x * (e - s))
                        .collect(),
                ))
            };
            let mut params = vec![f64::NAN; count + 1];
            params[0] = 0.0;
            params[count] = 1.0;
            let mut width = count;
            while width > 1 {
                let half = width / 2;
                for left in (0..count).step_by(width) {
                    let (xa, xb) = (params[left], params[left + width]);
                    let ga = at(xa);
                    let target = 0.5 * d_a(domain, &ga, &at(xb), metric);
                    let (mut lo, mut hi) = (xa, xb);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if d_a(domain, &ga, &at(mid), metric) < target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    params[left + half] = 0.5 * (lo + hi);
                }
                width = half;
            }
            Ok(params.into_iter().map(at).collect())
        }
        Domain::Tree(tr) => {
            let top = a1
                .tip()
                .and_then(Point::node)
                .and_then(|p| tr.id(p))
                .ok_or_else(|| Error::InvalidParameter("geodesic endpoint".into()))?;
            let mut chain: Vec<IndexSet> = tr
                .ancestors(top)
                .map(|i| IndexSet::Atom(Point::Tree(tr.path(i).to_vec())))
                .take_while(|s| domain.subset(a0, s) && s != a0)
                .collect();
            chain.push(a0.clone());
            chain.reverse();
            let dist: Vec<f64> = chain.iter().map(|s| d_a(domain, a0, s, metric)).collect();
            Ok((0..=count)
                .map(|k| {
                    let target = total * k as f64 / count as f64;
                    let best = (0..chain.len())
                        .min_by(|&i, &j| {
                            (dist[i] - target)
                                .abs()
                                .total_cmp(&(dist[j] - target).abs())
                        })
                        .unwrap_or(0);
                    chain[best].clone()
                })
                .collect())
        }
    }
}

/// `δ_n`: the largest distance between an element of `A_n` and one of its
/// maximal proper subsets in `A_n`.
pub fn mesh_delta(domain: &Domain, n: u32, metric: &MetricKind) -> f64 {
    match domain.cells(n) {
        CellLayout::Box(lattice) => {
            let g = lattice.grid();
            let mut delta: f64 = 0.0;
            for i in 0..lattice.len() {
                let multi = lattice.multi(i);
                let tip: Vec<f64> = multi.iter().map(|&k| g[k]).collect();
                let a = IndexSet::Atom(Point::Box(tip.clone()));
                for (ax, &k) in multi.iter().enumerate() {
                    if k > 0 {
                        let mut below = tip.clone();
                        below[ax] = g[k - 1];
                        delta =
                            delta.max(d_a(domain, &a, &IndexSet::Atom(Point::Box(below)), metric));
                    }
                }
            }
            delta
        }
        CellLayout::Tree { nodes, .. } => {
            let tr = domain.as_tree().expect("tree layout");
            nodes
                .iter()
                .filter_map(|&i| tr.parent(i).map(|p| (i, p)))
                .map(|(i, p)| {
                    d_a(
                        domain,
                        &IndexSet::Atom(Point::Tree(tr.path(i).to_vec())),
                        &IndexSet::Atom(Point::Tree(tr.path(p).to_vec())),
                        metric,
                    )
                })
                .fold(0.0, f64::max)
        }
    }
}
