//! Measures on the indexing space, inclusion-exclusion increment maps and
//! simple functions in disjoint `C`-representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexing::{BoxLattice, CellLayout, Domain, IncrementSet, IndexSet, Point};

/// Reference measure `m`.
///
/// `TreeLength` puts the length of the edge to the parent on every node
/// (zero on the root); `TreeCounting` puts unit mass on every node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Measure {
    Lebesgue {
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    TreeLength,
    TreeCounting,
}

fn unit_scale() -> f64 {
    1.0
}

impl Default for Measure {
    fn default() -> Self {
        Measure::lebesgue()
    }
}

impl Measure {
    pub fn lebesgue() -> Self {
        Measure::Lebesgue { scale: 1.0 }
    }

    /// The natural measure of a domain: Lebesgue on boxes, edge length on
    /// trees.
    pub fn natural(domain: &Domain) -> Self {
        match domain {
            Domain::Box(_) => Measure::lebesgue(),
            Domain::Tree(_) => Measure::TreeLength,
        }
    }

    pub fn validate(&self, domain: &Domain) -> Result<()> {
        match (self, domain) {
            (Measure::Lebesgue { scale }, Domain::Box(_)) => {
                if scale.is_finite() && *scale > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("measure scale {scale}")))
                }
            }
            (Measure::TreeLength | Measure::TreeCounting, Domain::Tree(_)) => Ok(()),
            _ => Err(Error::DomainMismatch(format!("{self:?} on this domain"))),
        }
    }

    fn node_weight(&self, domain: &Domain, id: usize) -> f64 {
        let tr = domain.as_tree().expect("tree measure on a tree");
        match self {
            Measure::TreeCounting => 1.0,
            _ => {
                if tr.parent(id).is_some() {
                    tr.edge_length(id)
                } else {
                    0.0
                }
            }
        }
    }

    /// `m(A)` for an element of the collection.
    pub fn of_set(&self, domain: &Domain, a: &IndexSet) -> f64 {
        match (a, domain) {
            (IndexSet::Empty, _) => 0.0,
            (IndexSet::Atom(Point::Box(c)), Domain::Box(_)) => match self {
                Measure::Lebesgue { scale } => scale * c.iter().product::<f64>(),
                _ => f64::NAN,
            },
            (IndexSet::Whole, Domain::Box(b)) => match self {
                Measure::Lebesgue { scale } => scale * b.side().powi(b.p() as i32),
                _ => f64::NAN,
            },
            (IndexSet::Atom(Point::Tree(path)), Domain::Tree(tr)) => match tr.id(path) {
                Some(id) => tr.ancestors(id).map(|i| self.node_weight(domain, i)).sum(),
                None => f64::NAN,
            },
            (IndexSet::Whole, Domain::Tree(tr)) => {
                (0..tr.len()).map(|i| self.node_weight(domain, i)).sum()
            }
            _ => f64::NAN,
        }
    }

    /// `m(C)` by exact inclusion-exclusion over the subtracted sets.
    pub fn of_increment(&self, domain: &Domain, c: &IncrementSet) -> f64 {
        delta_h(domain, |a: &IndexSet| self.of_set(domain, a), c)
    }

    /// Mass of cell `i` of a mesh level.
    pub fn of_cell(&self, domain: &Domain, cells: &CellLayout, i: usize) -> f64 {
        match (cells, self) {
            (CellLayout::Box(l), Measure::Lebesgue { scale }) => scale * l.cell_volume(i),
            (CellLayout::Tree { nodes, .. }, _) => self.node_weight(domain, nodes[i]),
            _ => f64::NAN,
        }
    }

    pub fn cell_masses(&self, domain: &Domain, cells: &CellLayout) -> Vec<f64> {
        (0..cells.len())
            .map(|i| self.of_cell(domain, cells, i))
            .collect()
    }

    /// `m(T_n)`, the mass of the union of the level-`n` mesh.
    pub fn of_mesh_extent(&self, domain: &Domain, n: u32) -> f64 {
        let cells = domain.cells(n);
        self.cell_masses(domain, &cells).iter().sum()
    }
}

/// `Δh(C)` for `h` defined on the collection with `h(∅) = 0`, through the
/// signed inclusion-exclusion expansion of `1_C`.
pub fn delta_h<H>(domain: &Domain, h: H, c: &IncrementSet) -> f64
where
    H: Fn(&IndexSet) -> f64,
{
    if c.is_empty() {
        return 0.0;
    }
    let parts = c.subtracted();
    let k = parts.len();
    assert!(k < 32, "increment set with {k} subtracted sets");
    let mut total = h(c.a0());
    for mask in 1u32..(1u32 << k) {
        let mut inter = c.a0().clone();
        for (i, part) in parts.iter().enumerate() {
            if mask & (1 << i) != 0 {
                inter = domain.intersect(&inter, part);
            }
        }
        if inter.is_empty() {
            continue;
        }
        let sign = if mask.count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        total += sign * h(&inter);
    }
    total
}

/// `Δh` of a disjoint union.
pub fn delta_h_union<H>(domain: &Domain, h: H, union: &[IncrementSet]) -> Result<f64>
where
    H: Fn(&IndexSet) -> f64,
{
    check_disjoint(domain, union.iter())?;
    Ok(union.iter().map(|c| delta_h(domain, &h, c)).sum())
}

pub(crate) fn check_disjoint<'a>(
    domain: &Domain,
    sets: impl Iterator<Item = &'a IncrementSet> + Clone,
) -> Result<()> {
    let v: Vec<&IncrementSet> = sets.collect();
    for (i, c) in v.iter().enumerate() {
        for d in &v[i + 1..] {
            if !domain.disjoint(c, d) {
                return Err(Error::Overlap);
            }
        }
    }
    Ok(())
}

/// A simple function `Σ a_i 1_{C_i}` with pairwise disjoint `C_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimpleFunction {
    terms: Vec<(f64, IncrementSet)>,
}

impl SimpleFunction {
    /// Checks disjointness and drops zero coefficients.
    pub fn new(domain: &Domain, terms: Vec<(f64, IncrementSet)>) -> Result<Self> {
        let terms: Vec<_> = terms
            .into_iter()
            .filter(|(a, c)| *a != 0.0 && !c.is_empty())
            .collect();
        check_disjoint(domain, terms.iter().map(|(_, c)| c))?;
        Ok(SimpleFunction { terms })
    }

    /// Disjoint `C`-representation of `Σ a_i 1_{A_i}`.
    ///
    /// The sets are closed under intersection; each point of `∪ A_i` lies in
    /// a unique smallest element `B` of that closure, and the pieces
    /// `B \ (strict sub-elements)` partition the union.
    pub fn from_indicators(domain: &Domain, span: &[(f64, IndexSet)]) -> Self {
        let mut closure: Vec<IndexSet> = Vec::new();
        let push = |closure: &mut Vec<IndexSet>, a: IndexSet| {
            if !a.is_empty() && !closure.contains(&a) {
                closure.push(a);
            }
        };
        for (_, a) in span {
            push(&mut closure, a.clone());
        }
        let mut i = 0;
        while i < closure.len() {
            for j in 0..i {
                let m = domain.intersect(&closure[i], &closure[j]);
                push(&mut closure, m);
            }
            i += 1;
        }
        let mut terms = Vec::new();
        for b in &closure {
            let below: Vec<IndexSet> = closure
                .iter()
                .filter(|x| *x != b && domain.subset(x, b))
                .cloned()
                .collect();
            let piece = domain.extremal_rep(b, &below);
            if piece.is_empty() {
                continue;
            }
            let coef: f64 = span
                .iter()
                .filter(|(_, a)| domain.subset(b, a))
                .map(|(w, _)| *w)
                .sum();
            if coef != 0.0 {
                terms.push((coef, piece));
            }
        }
        terms.sort_by(|x, y| {
            x.1.a0()
                .canonical_cmp(y.1.a0())
                .then_with(|| x.1.subtracted().len().cmp(&y.1.subtracted().len()))
        });
        SimpleFunction { terms }
    }

    pub fn terms(&self) -> &[(f64, IncrementSet)] {
        &self.terms
    }

    pub fn eval(&self, domain: &Domain, s: &Point) -> f64 {
        self.terms
            .iter()
            .filter(|(_, c)| domain.increment_contains(c, s))
            .map(|(a, _)| a)
            .sum()
    }

    /// `Σ a_i Δh(C_i)`, the linear extension of an increment map.
    pub fn integrate<H>(&self, domain: &Domain, h: H) -> f64
    where
        H: Fn(&IndexSet) -> f64,
    {
        self.terms
            .iter()
            .map(|(a, c)| a * delta_h(domain, &h, c))
            .sum()
    }
}

/// Indicator of a union of level-`n` cells on a box domain, flattened in
/// [`BoxLattice`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMask {
    pub level: u32,
    pub bits: Vec<bool>,
}

impl GridMask {
    /// Marks every cell whose centre satisfies `pred`.
    pub fn from_predicate(
        domain: &Domain,
        level: u32,
        pred: impl Fn(&[f64]) -> bool,
    ) -> Result<Self> {
        let lattice = box_lattice(domain, level)?;
        let bits = (0..lattice.len())
            .map(|i| lattice.cell_volume(i) > 0.0 && pred(&cell_center(&lattice, i)))
            .collect();
        Ok(GridMask { level, bits })
    }

    pub fn measure(&self, domain: &Domain, m: &Measure) -> f64 {
        let cells = domain.cells(self.level);
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| m.of_cell(domain, &cells, i))
            .sum()
    }

    pub fn contains(&self, domain: &Domain, s: &[f64]) -> bool {
        let Some(b) = domain.as_box() else {
            return false;
        };
        b.lattice(self.level)
            .locate(s)
            .is_some_and(|i| self.bits.get(i).copied().unwrap_or(false))
    }
}

pub(crate) fn box_lattice(domain: &Domain, level: u32) -> Result<BoxLattice> {
    domain
        .as_box()
        .map(|b| b.lattice(level))
        .ok_or_else(|| Error::DomainMismatch("grid operations need a box domain".into()))
}

pub(crate) fn cell_center(lattice: &BoxLattice, i: usize) -> Vec<f64> {
    let g = lattice.grid();
    lattice
        .multi(i)
        .into_iter()
        .map(|k| if k == 0 { 0.0 } else { 0.5 * (g[k - 1] + g[k]) })
        .collect()
}

/// Approximates a grid indicator by a disjoint union of left neighbourhoods
/// of the coarsest level `k <= max_level` whose outer cell cover is within
/// `eps` of the mask in `d_m`.
pub fn approximate_borel(
    domain: &Domain,
    mask: &GridMask,
    eps: f64,
    m: &Measure,
    max_level: Option<u32>,
) -> Result<Vec<IncrementSet>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps}")));
    }
    let fine = box_lattice(domain, mask.level)?;
    if mask.bits.len() != fine.len() {
        return Err(Error::InvalidParameter(
            "mask size does not match its level".into(),
        ));
    }
    let fine_cells = domain.cells(mask.level);
    let fine_mass = m.cell_masses(domain, &fine_cells);
    if !mask.bits.iter().any(|&b| b) {
        return Ok(Vec::new());
    }
    let top = max_level.unwrap_or(mask.level).min(mask.level);
    let mut best = f64::INFINITY;
    for k in 0..=top {
        let coarse = box_lattice(domain, k)?;
        let owner: Vec<Option<usize>> = (0..fine.len())
            .map(|i| coarse.locate(&fine.tip_coords(i)))
            .collect();
        let mut cover = vec![false; coarse.len()];
        for (i, &b) in mask.bits.iter().enumerate() {
            if b {
                if let Some(c) = owner[i] {
                    cover[c] = true;
                }
            }
        }
        let dist: f64 = (0..fine.len())
            .filter(|&i| owner[i].is_some_and(|c| cover[c]) != mask.bits[i])
            .map(|i| fine_mass[i])
            .sum();
        best = best.min(dist);
        if dist <= eps {
            let cells = domain.cells(k);
            return Ok(cover
                .iter()
                .enumerate()
                .filter(|(_, c)| **c)
                .map(|(i, _)| cells.cell(domain, i))
                .collect());
        }
    }
    Err(Error::Unachievable { eps, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(c: &[f64]) -> IndexSet {
        IndexSet::atom(c)
    }

    #[test]
    fn rectangle_area_and_empty() {
        let d = Domain::new_box(2, 2.0).unwrap();
        let m = Measure::lebesgue();
        assert_eq!(m.of_set(&d, &a(&[0.5, 2.0])), 1.0);
        assert_eq!(m.of_set(&d, &IndexSet::Empty), 0.0);
    }

    #[test]
    fn tree_path_length() {
        let leaf = TreeSpecBuilder::chain(3);
        let d = Domain::new_tree(vec![leaf]).unwrap();
        assert_eq!(
            Measure::TreeLength.of_set(&d, &IndexSet::node(&[1, 1, 1])),
            3.0
        );
        assert_eq!(Measure::TreeLength.of_set(&d, &IndexSet::node(&[])), 0.0);
        assert_eq!(
            Measure::TreeCounting.of_set(&d, &IndexSet::node(&[1, 1, 1])),
            4.0
        );
    }

    struct TreeSpecBuilder;
    impl TreeSpecBuilder {
        fn chain(depth: usize) -> crate::indexing::TreeSpec {
            let mut node = crate::indexing::TreeSpec {
                length: 1.0,
                children: vec![],
            };
            for _ in 1..depth {
                node = crate::indexing::TreeSpec {
                    length: 1.0,
                    children: vec![node],
                };
            }
            node
        }
    }

    #[test]
    fn two_corner_removal() {
        let d = Domain::unit_box(2);
        let m = Measure::lebesgue();
        let c = d.extremal_rep(&a(&[1.0, 1.0]), &[a(&[0.5, 1.0]), a(&[1.0, 0.5])]);
        assert!((m.of_increment(&d, &c) - 0.25).abs() < 1e-15);
        assert_eq!(
            m.of_increment(&d, &d.extremal_rep(&a(&[0.5, 0.5]), &[])),
            0.25
        );
        assert_eq!(m.of_increment(&d, &IncrementSet::empty()), 0.0);
    }

    #[test]
    fn rectangular_increment_of_product() {
        let d = Domain::unit_box(2);
        let h = |s: &IndexSet| {
            s.tip()
                .and_then(|t| t.coords())
                .map_or(0.0, |c| c[0] * c[1])
        };
        let c = d.extremal_rep(&a(&[1.0, 1.0]), &[a(&[0.5, 1.0]), a(&[1.0, 0.5])]);
        assert!((delta_h(&d, h, &c) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_telescoping() {
        let d = Domain::unit_box(1);
        let h = |s: &IndexSet| s.tip().and_then(|t| t.coords()).map_or(0.0, |c| c[0].sin());
        let c = d.extremal_rep(&a(&[0.9]), &[a(&[0.2])]);
        assert!((delta_h(&d, h, &c) - (0.9f64.sin() - 0.2f64.sin())).abs() < 1e-15);
        let u = [
            d.extremal_rep(&a(&[0.5]), &[a(&[0.2])]),
            d.extremal_rep(&a(&[0.9]), &[a(&[0.5])]),
        ];
        let total = delta_h_union(&d, h, &u).unwrap();
        assert!((total - (0.9f64.sin() - 0.2f64.sin())).abs() < 1e-15);
        assert_eq!(delta_h_union(&d, h, &[]).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_union_is_rejected() {
        let d = Domain::unit_box(1);
        let u = [
            d.extremal_rep(&a(&[0.6]), &[a(&[0.2])]),
            d.extremal_rep(&a(&[0.9]), &[a(&[0.5])]),
        ];
        assert!(matches!(
            delta_h_union(&d, |_: &IndexSet| 1.0, &u),
            Err(Error::Overlap)
        ));
    }

    #[test]
    fn c_representation_matches_indicator_sum() {
        let d = Domain::unit_box(2);
        let span = vec![
            (1.0, a(&[0.75, 0.5])),
            (2.0, a(&[0.25, 1.0])),
            (-0.5, a(&[1.0, 1.0])),
            (1.0, a(&[0.25, 0.25])),
        ];
        let f = SimpleFunction::from_indicators(&d, &span);
        for i in 0..=16 {
            for j in 0..=16 {
                let s = Point::Box(vec![i as f64 / 16.0, j as f64 / 16.0]);
                let direct: f64 = span
                    .iter()
                    .filter(|(_, set)| d.contains(set, &s))
                    .map(|(w, _)| w)
                    .sum();
                assert!((f.eval(&d, &s) - direct).abs() < 1e-12, "at {s}");
            }
        }
        SimpleFunction::new(&d, f.terms().to_vec()).expect("pieces are disjoint");
    }

    #[test]
    fn approximate_exact_mask() {
        let d = Domain::unit_box(2);
        let mask = GridMask::from_predicate(&d, 3, |c| c[0] < 0.5).unwrap();
        let m = Measure::lebesgue();
        let u = approximate_borel(&d, &mask, 1e-12, &m, None).unwrap();
        let area: f64 = u.iter().map(|c| m.of_increment(&d, c)).sum();
        assert!((area - 0.5).abs() < 1e-15);
        let empty = GridMask {
            level: 3,
            bits: vec![false; mask.bits.len()],
        };
        assert!(approximate_borel(&d, &empty, 0.1, &m, None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unachievable_when_level_capped() {
        let d = Domain::unit_box(2);
        let mask = GridMask::from_predicate(&d, 6, |c| c[0] * c[0] + c[1] * c[1] < 1.0).unwrap();
        let err = approximate_borel(&d, &mask, 1e-6, &Measure::lebesgue(), Some(2)).unwrap_err();
        assert!(matches!(err, Error::Unachievable { best, .. } if best > 1e-6));
    }
}
