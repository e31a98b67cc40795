use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::sets::{IncrementSet, IndexSet, Point};
use crate::error::{Error, Result};

/// Tree description as it appears in configuration files. Children are
/// numbered from 1 in declaration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    #[serde(default = "unit_length")]
    pub length: f64,
    #[serde(default)]
    pub children: Vec<TreeSpec>,
}

fn unit_length() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum DomainSpec {
    Box { p: usize, side: f64 },
    Tree { children: Vec<TreeSpec> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    p: usize,
    side: f64,
}

#[derive(Clone, Debug)]
struct TreeNode {
    path: Vec<u32>,
    parent: Option<usize>,
    depth: u32,
    length: f64,
    /// Sum of edge lengths from the root.
    height: f64,
}

#[derive(Clone, Debug)]
pub struct TreeDomain {
    nodes: Vec<TreeNode>,
    index: HashMap<Vec<u32>, usize>,
    spec: Vec<TreeSpec>,
}

/// The indexing space together with its indexing collection.
#[derive(Clone, Debug)]
pub enum Domain {
    Box(BoxDomain),
    Tree(TreeDomain),
}

/// The finite sub-collection `A_n`, listed by tips.
#[derive(Clone, Debug)]
pub struct MeshLevel {
    pub level: u32,
    pub tips: Vec<Point>,
}

/// Row-major product grid of the level-`n` axis values. Multi-index `k`
/// names both the mesh tip with coordinates `grid[k_i]` and the left
/// neighbourhood whose upper corner is that tip. Cells with some `k_i = 0`
/// lie on the boundary and have zero volume.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxLattice {
    p: usize,
    grid: Vec<f64>,
}

/// Indexing of the left neighbourhoods `C^ℓ(A_n)` of one mesh level.
#[derive(Clone, Debug)]
pub enum CellLayout {
    Box(BoxLattice),
    Tree {
        level: u32,
        nodes: Vec<usize>,
        slot: Vec<Option<usize>>,
    },
}

impl BoxDomain {
    pub fn new(p: usize, side: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter(
                "box dimension must be positive".into(),
            ));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidParameter(format!("box side {side}")));
        }
        Ok(BoxDomain { p, side })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Axis values `k 2^-n` with `k <= n 2^n`, clipped to the side.
    pub fn axis_grid(&self, n: u32) -> Vec<f64> {
        let step = (-(n as f64)).exp2();
        let limit = self.side.min(n as f64);
        let mut grid = Vec::new();
        let mut k = 0u64;
        loop {
            let v = k as f64 * step;
            if v > limit {
                break;
            }
            grid.push(v);
            k += 1;
        }
        let last = *grid.last().unwrap();
        if self.side <= n as f64 && last < self.side {
            grid.push(self.side);
        }
        grid
    }

    pub fn lattice(&self, n: u32) -> BoxLattice {
        BoxLattice {
            p: self.p,
            grid: self.axis_grid(n),
        }
    }
}

impl BoxLattice {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn axis_len(&self) -> usize {
        self.grid.len()
    }

    pub fn len(&self) -> usize {
        self.grid.len().pow(self.p as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        let m = self.grid.len();
        multi.iter().fold(0, |acc, &k| acc * m + k)
    }

    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let m = self.grid.len();
        let mut out = vec![0; self.p];
        for slot in out.iter_mut().rev() {
            *slot = flat % m;
            flat /= m;
        }
        out
    }

    pub fn tip_coords(&self, flat: usize) -> Vec<f64> {
        self.multi(flat).into_iter().map(|k| self.grid[k]).collect()
    }

    pub fn cell_volume(&self, flat: usize) -> f64 {
        self.multi(flat)
            .into_iter()
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    self.grid[k] - self.grid[k - 1]
                }
            })
            .product()
    }

    /// Axis index of the half-open cell `(g[k-1], g[k]]` holding `x`.
    pub fn axis_locate(&self, x: f64) -> Option<usize> {
        if !(x >= 0.0) {
            return None;
        }
        let k = self.grid.partition_point(|&g| g < x);
        (k < self.grid.len()).then_some(k)
    }

    /// Axis index of a grid value, tolerant to rounding in the input.
    pub fn axis_index(&self, x: f64) -> Option<usize> {
        let tol = 1e-12 * self.grid.last().copied().unwrap_or(1.0).max(1.0);
        let k = self.grid.partition_point(|&g| g < x - tol);
        (k < self.grid.len() && (self.grid[k] - x).abs() <= tol).then_some(k)
    }

    pub fn locate(&self, coords: &[f64]) -> Option<usize> {
        let mut multi = Vec::with_capacity(self.p);
        for &x in coords {
            multi.push(self.axis_locate(x)?);
        }
        Some(self.flat(&multi))
    }

    pub fn index_of_tip(&self, coords: &[f64]) -> Option<usize> {
        let mut multi = Vec::with_capacity(self.p);
        for &x in coords {
            multi.push(self.axis_index(x)?);
        }
        Some(self.flat(&multi))
    }

    /// In-place cumulative sums along every axis: afterwards entry `k` holds
    /// the sum of the original entries at multi-indices `<= k`.
    pub fn prefix_sum(&self, values: &mut [f64]) {
        let m = self.grid.len();
        let mut stride = 1;
        for _ in 0..self.p {
            for i in 0..values.len() {
                if (i / stride) % m != 0 {
                    values[i] += values[i - stride];
                }
            }
            stride *= m;
        }
    }
}

impl TreeDomain {
    pub fn new(children: Vec<TreeSpec>) -> Result<Self> {
        let mut nodes = vec![TreeNode {
            path: Vec::new(),
            parent: None,
            depth: 0,
            length: 0.0,
            height: 0.0,
        }];
        let mut stack: Vec<(usize, &TreeSpec, u32)> = Vec::new();
        for (i, c) in children.iter().enumerate().rev() {
            stack.push((0, c, i as u32 + 1));
        }
        while let Some((parent, spec, label)) = stack.pop() {
            if !(spec.length.is_finite() && spec.length > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge length {}",
                    spec.length
                )));
            }
            let mut path = nodes[parent].path.clone();
            path.push(label);
            let id = nodes.len();
            nodes.push(TreeNode {
                path,
                parent: Some(parent),
                depth: nodes[parent].depth + 1,
                length: spec.length,
                height: nodes[parent].height + spec.length,
            });
            for (i, c) in spec.children.iter().enumerate().rev() {
                stack.push((id, c, i as u32 + 1));
            }
        }
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.path.clone(), i))
            .collect();
        Ok(TreeDomain {
            nodes,
            index,
            spec: children,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn id(&self, path: &[u32]) -> Option<usize> {
        self.index.get(path).copied()
    }

    pub fn path(&self, id: usize) -> &[u32] {
        &self.nodes[id].path
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes[id].parent
    }

    pub fn depth(&self, id: usize) -> u32 {
        self.nodes[id].depth
    }

    pub fn edge_length(&self, id: usize) -> f64 {
        self.nodes[id].length
    }

    /// Edge length from the root down to the node.
    pub fn height(&self, id: usize) -> f64 {
        self.nodes[id].height
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn ancestors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(id), move |&i| self.nodes[i].parent)
    }
}

fn is_prefix(a: &[u32], b: &[u32]) -> bool {
    a.len() <= b.len() && a == &b[..a.len()]
}

impl Domain {
    pub fn unit_box(p: usize) -> Self {
        Domain::Box(BoxDomain { p, side: 1.0 })
    }

    pub fn new_box(p: usize, side: f64) -> Result<Self> {
        Ok(Domain::Box(BoxDomain::new(p, side)?))
    }

    pub fn new_tree(children: Vec<TreeSpec>) -> Result<Self> {
        Ok(Domain::Tree(TreeDomain::new(children)?))
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        match serde_json::from_value::<DomainSpec>(value.clone())? {
            DomainSpec::Box { p, side } => Domain::new_box(p, side),
            DomainSpec::Tree { children } => Domain::new_tree(children),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let spec = match self {
            Domain::Box(b) => DomainSpec::Box {
                p: b.p,
                side: b.side,
            },
            Domain::Tree(t) => DomainSpec::Tree {
                children: t.spec.clone(),
            },
        };
        serde_json::to_value(spec).expect("domain spec serializes")
    }

    /// Dimension of the collection: `p` for boxes, 1 for trees.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box(b) => b.p,
            Domain::Tree(_) => 1,
        }
    }

    pub fn as_box(&self) -> Option<&BoxDomain> {
        match self {
            Domain::Box(b) => Some(b),
            Domain::Tree(_) => None,
        }
    }

    pub fn as_tree(&self) -> Option<&TreeDomain> {
        match self {
            Domain::Tree(t) => Some(t),
            Domain::Box(_) => None,
        }
    }

    pub fn check_point(&self, t: &Point) -> Result<()> {
        match (self, t) {
            (Domain::Box(b), Point::Box(c)) => {
                if c.len() != b.p {
                    return Err(Error::DomainMismatch(format!(
                        "point of dimension {} in a {}-dimensional box",
                        c.len(),
                        b.p
                    )));
                }
                if c.iter().all(|x| x.is_finite() && *x >= 0.0 && *x <= b.side) {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!(
                        "{t} outside [0, {}]^{}",
                        b.side, b.p
                    )))
                }
            }
            (Domain::Tree(tr), Point::Tree(path)) => tr
                .id(path)
                .map(|_| ())
                .ok_or_else(|| Error::InvalidPoint(format!("node {t} not in the tree"))),
            _ => Err(Error::DomainMismatch(format!("{t}"))),
        }
    }

    pub fn zero(&self) -> Point {
        match self {
            Domain::Box(b) => Point::Box(vec![0.0; b.p]),
            Domain::Tree(_) => Point::Tree(Vec::new()),
        }
    }

    pub fn whole(&self) -> IndexSet {
        match self {
            Domain::Box(b) => IndexSet::Atom(Point::Box(vec![b.side; b.p])),
            Domain::Tree(_) => IndexSet::Whole,
        }
    }

    /// `d_T(s, t)`: Euclidean on boxes, path length along the edges on
    /// trees.
    pub fn distance(&self, s: &Point, t: &Point) -> f64 {
        match (self, s, t) {
            (Domain::Box(_), Point::Box(a), Point::Box(b)) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            (Domain::Tree(tr), Point::Tree(a), Point::Tree(b)) => {
                let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
                let h = |p: &[u32]| tr.id(p).map_or(f64::NAN, |i| tr.height(i));
                h(a) + h(b) - 2.0 * h(&a[..common])
            }
            _ => f64::NAN,
        }
    }

    /// Reads a point given as a list of numbers: coordinates on boxes,
    /// child indices on trees.
    pub fn point(&self, raw: &[f64]) -> Result<Point> {
        let t = match self {
            Domain::Box(_) => Point::Box(raw.to_vec()),
            Domain::Tree(_) => {
                if raw
                    .iter()
                    .any(|x| x.fract() != 0.0 || *x < 1.0 || *x > u32::MAX as f64)
                {
                    return Err(Error::InvalidPoint(format!("{raw:?} is not a node path")));
                }
                Point::Tree(raw.iter().map(|&x| x as u32).collect())
            }
        };
        self.check_point(&t)?;
        Ok(t)
    }

    /// The partial order `s ≼ t`: componentwise for boxes, ancestor-or-equal
    /// for trees.
    pub fn leq(&self, s: &Point, t: &Point) -> Result<bool> {
        match (s, t) {
            (Point::Box(a), Point::Box(b)) if a.len() == b.len() => {
                Ok(a.iter().zip(b).all(|(x, y)| x <= y))
            }
            (Point::Tree(a), Point::Tree(b)) => Ok(is_prefix(a, b)),
            _ => Err(Error::DomainMismatch(format!("{s} vs {t}"))),
        }
    }

    /// Greatest lower bound: componentwise minimum or deepest common
    /// ancestor.
    pub fn meet(&self, s: &Point, t: &Point) -> Result<Point> {
        match (s, t) {
            (Point::Box(a), Point::Box(b)) if a.len() == b.len() => Ok(Point::Box(
                a.iter().zip(b).map(|(x, y)| x.min(*y)).collect(),
            )),
            (Point::Tree(a), Point::Tree(b)) => {
                let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
                Ok(Point::Tree(a[..common].to_vec()))
            }
            _ => Err(Error::DomainMismatch(format!("{s} vs {t}"))),
        }
    }

    /// `s ∈ A`.
    pub fn contains(&self, set: &IndexSet, s: &Point) -> bool {
        match set {
            IndexSet::Empty => false,
            IndexSet::Whole => true,
            IndexSet::Atom(t) => self.leq(s, t).unwrap_or(false),
        }
    }

    pub fn intersect(&self, a: &IndexSet, b: &IndexSet) -> IndexSet {
        match (a, b) {
            (IndexSet::Empty, _) | (_, IndexSet::Empty) => IndexSet::Empty,
            (IndexSet::Whole, x) | (x, IndexSet::Whole) => x.clone(),
            (IndexSet::Atom(s), IndexSet::Atom(t)) => match self.meet(s, t) {
                Ok(m) => IndexSet::Atom(m),
                Err(_) => IndexSet::Empty,
            },
        }
    }

    pub fn subset(&self, a: &IndexSet, b: &IndexSet) -> bool {
        match (a, b) {
            (IndexSet::Empty, _) => true,
            (_, IndexSet::Empty) => false,
            (_, IndexSet::Whole) => true,
            (IndexSet::Atom(s), IndexSet::Atom(t)) => self.leq(s, t).unwrap_or(false),
            (IndexSet::Whole, IndexSet::Atom(t)) => match self {
                Domain::Box(b) => t.coords().is_some_and(|c| c.iter().all(|&x| x >= b.side)),
                Domain::Tree(tr) => {
                    let t = t.node().unwrap_or(&[]);
                    tr.nodes.iter().all(|n| is_prefix(&n.path, t))
                }
            },
        }
    }

    pub fn mesh(&self, n: u32) -> MeshLevel {
        let tips = match self {
            Domain::Box(b) => {
                let lattice = b.lattice(n);
                (0..lattice.len())
                    .map(|i| Point::Box(lattice.tip_coords(i)))
                    .collect()
            }
            Domain::Tree(t) => t
                .nodes
                .iter()
                .filter(|nd| nd.depth <= n)
                .map(|nd| Point::Tree(nd.path.clone()))
                .collect(),
        };
        MeshLevel { level: n, tips }
    }

    /// Whether `t` is a tip of `A_n`.
    pub fn on_mesh(&self, t: &Point, n: u32) -> bool {
        match (self, t) {
            (Domain::Box(b), Point::Box(c)) => {
                c.len() == b.p && b.lattice(n).index_of_tip(c).is_some()
            }
            (Domain::Tree(tr), Point::Tree(path)) => tr.id(path).is_some_and(|i| tr.depth(i) <= n),
            _ => false,
        }
    }

    pub fn set_on_mesh(&self, a: &IndexSet, n: u32) -> bool {
        match a {
            IndexSet::Atom(t) => self.on_mesh(t, n),
            IndexSet::Empty | IndexSet::Whole => true,
        }
    }

    /// `g_n(A)`: the smallest element of `A_n ∪ {T}` containing `A`.
    pub fn g_n(&self, a: &IndexSet, n: u32) -> IndexSet {
        match (self, a) {
            (_, IndexSet::Empty) => IndexSet::Empty,
            (_, IndexSet::Whole) => self.whole(),
            (Domain::Box(b), IndexSet::Atom(Point::Box(c))) => {
                let lattice = b.lattice(n);
                let mut up = Vec::with_capacity(c.len());
                for &x in c {
                    match lattice.axis_locate(x) {
                        Some(k) => up.push(lattice.grid[k]),
                        None => return self.whole(),
                    }
                }
                IndexSet::Atom(Point::Box(up))
            }
            (Domain::Tree(tr), IndexSet::Atom(Point::Tree(path))) => match tr.id(path) {
                Some(i) if tr.depth(i) <= n => a.clone(),
                _ => IndexSet::Whole,
            },
            _ => self.whole(),
        }
    }

    pub fn cells(&self, n: u32) -> CellLayout {
        match self {
            Domain::Box(b) => CellLayout::Box(b.lattice(n)),
            Domain::Tree(t) => {
                let nodes: Vec<usize> = (0..t.len()).filter(|&i| t.depth(i) <= n).collect();
                let mut slot = vec![None; t.len()];
                for (k, &i) in nodes.iter().enumerate() {
                    slot[i] = Some(k);
                }
                CellLayout::Tree {
                    level: n,
                    nodes,
                    slot,
                }
            }
        }
    }

    /// `C_n(t)`, the left neighbourhood of level `n` containing `t`. Points
    /// outside `T_n` get the whole space, following the usual convention.
    pub fn left_neighborhood(&self, t: &Point, n: u32) -> Result<IncrementSet> {
        self.check_point(t)?;
        match (self, t) {
            (Domain::Box(b), Point::Box(c)) => {
                let lattice = b.lattice(n);
                match lattice.locate(c) {
                    Some(i) => Ok(self.box_cell(&lattice, i)),
                    None => Ok(self.extremal_rep(&self.whole(), &[])),
                }
            }
            (Domain::Tree(tr), Point::Tree(path)) => {
                let id = tr.id(path).expect("checked");
                if tr.depth(id) > n {
                    return Ok(self.extremal_rep(&IndexSet::Whole, &[]));
                }
                Ok(self.tree_cell(tr, id))
            }
            _ => unreachable!("checked"),
        }
    }

    fn box_cell(&self, lattice: &BoxLattice, flat: usize) -> IncrementSet {
        let multi = lattice.multi(flat);
        let tip: Vec<f64> = multi.iter().map(|&k| lattice.grid[k]).collect();
        let mut parts = Vec::new();
        for (i, &k) in multi.iter().enumerate() {
            if k > 0 {
                let mut lower = tip.clone();
                lower[i] = lattice.grid[k - 1];
                parts.push(IndexSet::Atom(Point::Box(lower)));
            }
        }
        self.extremal_rep(&IndexSet::Atom(Point::Box(tip)), &parts)
    }

    fn tree_cell(&self, tr: &TreeDomain, id: usize) -> IncrementSet {
        let a0 = IndexSet::Atom(Point::Tree(tr.path(id).to_vec()));
        let parts: Vec<IndexSet> = tr
            .parent(id)
            .map(|p| IndexSet::Atom(Point::Tree(tr.path(p).to_vec())))
            .into_iter()
            .collect();
        self.extremal_rep(&a0, &parts)
    }

    /// Canonical extremal representation of `a0 \ ∪ parts`.
    pub fn extremal_rep(&self, a0: &IndexSet, parts: &[IndexSet]) -> IncrementSet {
        if a0.is_empty() {
            return IncrementSet::empty();
        }
        let mut kept: Vec<IndexSet> = Vec::new();
        for part in parts {
            let p = self.intersect(part, a0);
            if p.is_empty() {
                continue;
            }
            if self.subset(a0, &p) {
                return IncrementSet::empty();
            }
            kept.push(p);
        }
        // drop duplicates and non-maximal members
        let mut maximal: Vec<IndexSet> = Vec::new();
        for (i, p) in kept.iter().enumerate() {
            let dominated = kept
                .iter()
                .enumerate()
                .any(|(j, q)| j != i && self.subset(p, q) && (!self.subset(q, p) || j < i));
            if !dominated {
                maximal.push(p.clone());
            }
        }
        maximal.sort_by(|a, b| a.canonical_cmp(b));
        let inc = IncrementSet {
            a0: a0.clone(),
            subtracted: maximal,
        };
        if self.increment_is_empty(&inc) {
            IncrementSet::empty()
        } else {
            inc
        }
    }

    /// Exact emptiness test. For an atom `a0 = A(u)`, the set is empty iff
    /// `u` itself is removed.
    pub fn increment_is_empty(&self, c: &IncrementSet) -> bool {
        match (&c.a0, self) {
            (IndexSet::Empty, _) => true,
            (IndexSet::Atom(u), _) => c.subtracted.iter().any(|a| self.contains(a, u)),
            (IndexSet::Whole, Domain::Tree(tr)) => tr.nodes.iter().all(|nd| {
                let p = Point::Tree(nd.path.clone());
                c.subtracted.iter().any(|a| self.contains(a, &p))
            }),
            (IndexSet::Whole, Domain::Box(_)) => {
                c.subtracted.iter().any(|a| self.subset(&self.whole(), a))
            }
        }
    }

    /// `s ∈ C`.
    pub fn increment_contains(&self, c: &IncrementSet, s: &Point) -> bool {
        self.contains(&c.a0, s) && !c.subtracted.iter().any(|a| self.contains(a, s))
    }

    /// Exact intersection of two increment sets.
    pub fn increment_intersect(&self, c: &IncrementSet, d: &IncrementSet) -> IncrementSet {
        let a0 = self.intersect(&c.a0, &d.a0);
        let parts: Vec<IndexSet> = c.subtracted.iter().chain(&d.subtracted).cloned().collect();
        self.extremal_rep(&a0, &parts)
    }

    pub fn disjoint(&self, c: &IncrementSet, d: &IncrementSet) -> bool {
        self.increment_intersect(c, d).is_empty()
    }

    /// Whether every constituent of `c` is an element of `A_n ∪ {∅, T}`, so
    /// that `c` is a union of level-`n` cells.
    pub fn increment_on_mesh(&self, c: &IncrementSet, n: u32) -> bool {
        c.constituents().all(|a| self.set_on_mesh(a, n))
    }
}

impl CellLayout {
    pub fn level(&self) -> Option<u32> {
        match self {
            CellLayout::Box(_) => None,
            CellLayout::Tree { level, .. } => Some(*level),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CellLayout::Box(l) => l.len(),
            CellLayout::Tree { nodes, .. } => nodes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_box(&self) -> Option<&BoxLattice> {
        match self {
            CellLayout::Box(l) => Some(l),
            CellLayout::Tree { .. } => None,
        }
    }

    pub fn tip(&self, domain: &Domain, i: usize) -> Point {
        match (self, domain) {
            (CellLayout::Box(l), _) => Point::Box(l.tip_coords(i)),
            (CellLayout::Tree { nodes, .. }, Domain::Tree(tr)) => {
                Point::Tree(tr.path(nodes[i]).to_vec())
            }
            _ => panic!("cell layout used with a different domain"),
        }
    }

    /// Index of the cell containing `s`, if `s ∈ T_n`.
    pub fn locate(&self, domain: &Domain, s: &Point) -> Option<usize> {
        match (self, domain, s) {
            (CellLayout::Box(l), _, Point::Box(c)) => l.locate(c),
            (CellLayout::Tree { slot, .. }, Domain::Tree(tr), Point::Tree(path)) => {
                tr.id(path).and_then(|i| slot[i])
            }
            _ => None,
        }
    }

    pub fn cell(&self, domain: &Domain, i: usize) -> IncrementSet {
        match (self, domain) {
            (CellLayout::Box(l), _) => domain.box_cell(l, i),
            (CellLayout::Tree { nodes, .. }, Domain::Tree(tr)) => domain.tree_cell(tr, nodes[i]),
            _ => panic!("cell layout used with a different domain"),
        }
    }
}
