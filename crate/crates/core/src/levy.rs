//! Lévy triplets, the Lévy-Khintchine exponent and sample paths built from
//! the truncated Lévy-Itô decomposition.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexing::{CellLayout, Domain, IncrementSet, IndexSet, Point};
use crate::measure::{delta_h, Measure};

/// A point mass `rate · δ_x` of the Lévy measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub x: f64,
    pub rate: f64,
}

/// Symmetric stable density `c |x|^{-1-α}` restricted to `0 < |x| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncStable {
    pub alpha: f64,
    pub c: f64,
}

/// Lévy measure `ν = Σ rate_i δ_{x_i} (+ truncated stable part)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyMeasureSpec {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable: Option<TruncStable>,
}

impl LevyMeasureSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atoms(atoms: &[(f64, f64)]) -> Self {
        LevyMeasureSpec {
            atoms: atoms.iter().map(|&(x, rate)| Atom { x, rate }).collect(),
            stable: None,
        }
    }

    pub fn stable(alpha: f64, c: f64) -> Self {
        LevyMeasureSpec {
            atoms: Vec::new(),
            stable: Some(TruncStable { alpha, c }),
        }
    }

    /// `self ⊕ other`.
    pub fn plus(mut self, other: &LevyMeasureSpec) -> Result<Self> {
        self.atoms.extend_from_slice(&other.atoms);
        self.stable = match (self.stable, other.stable) {
            (None, s) | (s, None) => s,
            (Some(a), Some(b)) if a.alpha == b.alpha => Some(TruncStable {
                alpha: a.alpha,
                c: a.c + b.c,
            }),
            _ => {
                return Err(Error::InvalidParameter(
                    "cannot add stable parts with different indices".into(),
                ))
            }
        };
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.x.is_finite() && a.x != 0.0) {
                return Err(Error::InvalidParameter(format!("atom location {}", a.x)));
            }
            if !(a.rate.is_finite() && a.rate > 0.0) {
                return Err(Error::InvalidParameter(format!("atom rate {}", a.rate)));
            }
        }
        if let Some(s) = self.stable {
            if !(s.alpha > 0.0 && s.alpha < 2.0) {
                return Err(Error::InvalidParameter(format!("stable index {}", s.alpha)));
            }
            if !(s.c.is_finite() && s.c > 0.0) {
                return Err(Error::InvalidParameter(format!("stable scale {}", s.c)));
            }
        }
        Ok(())
    }

    fn atom_rate(&self) -> f64 {
        self.atoms.iter().map(|a| a.rate).sum()
    }

    fn stable_mass_above(&self, eps: f64) -> f64 {
        match self.stable {
            Some(s) if eps < 1.0 => 2.0 * s.c * (eps.powf(-s.alpha) - 1.0) / s.alpha,
            _ => 0.0,
        }
    }

    /// `ν({|x| >= ε})`. Atoms always count in full: the truncation only
    /// applies to the stable part.
    pub fn mass_above(&self, eps: f64) -> f64 {
        self.atom_rate() + self.stable_mass_above(eps)
    }

    /// `∫ x² ν(dx)`.
    pub fn second_moment(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.rate * a.x * a.x).sum();
        let stable = self.stable.map_or(0.0, |s| 2.0 * s.c / (2.0 - s.alpha));
        atoms + stable
    }

    /// `∫_{|x|>1} x ν(dx)`.
    pub fn big_jump_mean(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.x.abs() > 1.0)
            .map(|a| a.rate * a.x)
            .sum()
    }

    /// `∫_{ε<=|x|<=1} x ν(dx)`. The stable part is symmetric and
    /// contributes nothing.
    pub fn compensator(&self, _eps: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.x.abs() <= 1.0)
            .map(|a| a.rate * a.x)
            .sum()
    }

    /// `∫_{|x|<=1} |x| ν(dx)`, or `None` when infinite.
    pub fn abs_small(&self) -> Option<f64> {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.x.abs() <= 1.0)
            .map(|a| a.rate * a.x.abs())
            .sum();
        match self.stable {
            None => Some(atoms),
            Some(s) if s.alpha < 1.0 => Some(atoms + 2.0 * s.c / (1.0 - s.alpha)),
            Some(_) => None,
        }
    }

    /// Blumenthal-Getoor exponent.
    pub fn beta(&self) -> f64 {
        self.stable.map_or(0.0, |s| s.alpha)
    }
}

/// `(b, σ², ν)`, all rates per unit of `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyTriplet {
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub sigma2: f64,
    #[serde(default)]
    pub nu: LevyMeasureSpec,
}

impl LevyTriplet {
    pub fn new(b: f64, sigma2: f64, nu: LevyMeasureSpec) -> Result<Self> {
        let t = LevyTriplet { b, sigma2, nu };
        t.validate()?;
        Ok(t)
    }

    /// The zero process.
    pub fn zero() -> Self {
        LevyTriplet {
            b: 0.0,
            sigma2: 0.0,
            nu: LevyMeasureSpec::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!("drift {}", self.b)));
        }
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma2 {}", self.sigma2)));
        }
        self.nu.validate()
    }

    /// `E[ΔX_C] / m(C)`.
    pub fn mean_rate(&self) -> f64 {
        self.b + self.nu.big_jump_mean()
    }

    /// `Var(ΔX_C) / m(C)`.
    pub fn var_rate(&self) -> f64 {
        self.sigma2 + self.nu.second_moment()
    }

    pub fn beta(&self) -> f64 {
        self.nu.beta()
    }

    /// The Lévy-Khintchine exponent `ψ(ξ)`.
    pub fn psi(&self, xi: f64) -> Result<Complex64> {
        let mut out = Complex64::new(-0.5 * self.sigma2 * xi * xi, self.b * xi);
        for a in &self.nu.atoms {
            let small = if a.x.abs() <= 1.0 { xi * a.x } else { 0.0 };
            let e = Complex64::new(0.0, xi * a.x).exp();
            out += a.rate * (e - 1.0 - Complex64::new(0.0, small));
        }
        if let Some(s) = self.nu.stable {
            out += 2.0 * s.c * stable_cos_integral(s.alpha, xi)?;
        }
        Ok(out)
    }
}

/// `∫_0^1 (cos ξx − 1) x^{-1-α} dx`, after `x = u^{1/(2-α)}` which turns
/// the integrand into a smooth function on `[0, 1]`.
fn stable_cos_integral(alpha: f64, xi: f64) -> Result<f64> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    let k = 1.0 / (2.0 - alpha);
    let g = |u: f64| {
        if u == 0.0 {
            return -0.5 * k * xi * xi;
        }
        let x = u.powf(k);
        // cos y − 1 = −2 sin²(y/2) avoids cancellation for small y
        let s = (0.5 * xi * x).sin();
        -2.0 * k * s * s * u.powf(-k * alpha - 1.0)
    };
    // split the range so oscillations at large |ξ| stay resolved
    let pieces = ((xi.abs() / 4.0).ceil() as usize).clamp(1, 4096);
    let mut total = 0.0;
    for i in 0..pieces {
        let a = i as f64 / pieces as f64;
        let b = (i + 1) as f64 / pieces as f64;
        total += adaptive_simpson(&g, a, b, 1e-13 / pieces as f64, 48)?;
    }
    Ok(total)
}

pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if !diff.is_finite() {
        return Err(Error::Quadrature(format!("non-finite value on [{a}, {b}]")));
    }
    if diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!("no convergence on [{a}, {b}]")));
    }
    Ok(
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}

/// `(1/N) Σ exp(iξ s)`.
pub fn empirical_cf(samples: &[f64], xi: f64) -> Complex64 {
    let n = samples.len() as f64;
    let (re, im) = samples.iter().fold((0.0, 0.0), |(re, im), &s| {
        (re + (xi * s).cos(), im + (xi * s).sin())
    });
    Complex64::new(re / n, im / n)
}

/// The generator for path `stream` of a run seeded with `seed`.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A jump `J_t` at location `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpRecord {
    pub location: Point,
    pub size: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Locations {
    Box { p: usize, coords: Vec<f64> },
    Tree(Vec<usize>),
}

/// Jump locations and sizes stored column-wise, with the mesh cell of each
/// jump.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpList {
    locations: Locations,
    sizes: Vec<f64>,
    cells: Vec<usize>,
}

impl JumpList {
    fn new(domain: &Domain) -> Self {
        let locations = match domain {
            Domain::Box(b) => Locations::Box {
                p: b.p(),
                coords: Vec::new(),
            },
            Domain::Tree(_) => Locations::Tree(Vec::new()),
        };
        JumpList {
            locations,
            sizes: Vec::new(),
            cells: Vec::new(),
        }
    }

    /// Rebuilds a jump list from records, locating each jump on the
    /// level-`n` mesh.
    pub fn from_records(domain: &Domain, n: u32, records: &[JumpRecord]) -> Result<Self> {
        let cells = domain.cells(n);
        let mut out = JumpList::new(domain);
        for r in records {
            domain.check_point(&r.location)?;
            let cell = cells.locate(domain, &r.location).ok_or_else(|| {
                Error::InvalidPoint(format!("jump at {} outside the level-{n} mesh", r.location))
            })?;
            match (&mut out.locations, &r.location, domain) {
                (Locations::Box { coords, .. }, Point::Box(c), _) => coords.extend_from_slice(c),
                (Locations::Tree(ids), Point::Tree(path), Domain::Tree(tr)) => {
                    ids.push(tr.id(path).expect("checked"))
                }
                _ => unreachable!("checked"),
            }
            out.sizes.push(r.size);
            out.cells.push(cell);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Coordinates of jump `i` on a box domain.
    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        match &self.locations {
            Locations::Box { p, coords } => Some(&coords[i * p..(i + 1) * p]),
            Locations::Tree(_) => None,
        }
    }

    pub fn location(&self, domain: &Domain, i: usize) -> Point {
        match (&self.locations, domain) {
            (Locations::Box { .. }, _) => Point::Box(self.coords(i).unwrap().to_vec()),
            (Locations::Tree(ids), Domain::Tree(tr)) => Point::Tree(tr.path(ids[i]).to_vec()),
            _ => panic!("jump list used with a different domain"),
        }
    }

    pub fn get(&self, domain: &Domain, i: usize) -> JumpRecord {
        JumpRecord {
            location: self.location(domain, i),
            size: self.sizes[i],
        }
    }

    /// Same locations with sizes replaced by `size(i)`, dropping jumps for
    /// which it returns zero.
    pub(crate) fn map_sizes(&self, size: impl Fn(usize) -> f64) -> JumpList {
        let mut out = JumpList {
            locations: match &self.locations {
                Locations::Box { p, .. } => Locations::Box {
                    p: *p,
                    coords: Vec::new(),
                },
                Locations::Tree(_) => Locations::Tree(Vec::new()),
            },
            sizes: Vec::new(),
            cells: Vec::new(),
        };
        for i in 0..self.len() {
            let s = size(i);
            if s == 0.0 {
                continue;
            }
            match (&self.locations, &mut out.locations) {
                (Locations::Box { p, coords }, Locations::Box { coords: dst, .. }) => {
                    dst.extend_from_slice(&coords[i * p..(i + 1) * p])
                }
                (Locations::Tree(ids), Locations::Tree(dst)) => dst.push(ids[i]),
                _ => unreachable!(),
            }
            out.sizes.push(s);
            out.cells.push(self.cells[i]);
        }
        out
    }
}

/// Per-cell increments of a set function on one mesh level together with
/// their cumulative sums, so that the value on any mesh atom is a lookup.
#[derive(Clone, Debug)]
pub struct CellField {
    domain: Domain,
    level: u32,
    cells: CellLayout,
    increments: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CellField {
    pub fn new(domain: &Domain, level: u32, increments: Vec<f64>) -> Self {
        let cells = domain.cells(level);
        assert_eq!(cells.len(), increments.len());
        let mut cumulative = increments.clone();
        match (&cells, domain) {
            (CellLayout::Box(l), _) => l.prefix_sum(&mut cumulative),
            (CellLayout::Tree { nodes, slot, .. }, Domain::Tree(tr)) => {
                // nodes are in preorder, so parents are already final
                for k in 0..nodes.len() {
                    if let Some(p) = tr.parent(nodes[k]) {
                        cumulative[k] += cumulative[slot[p].expect("parent on mesh")];
                    }
                }
            }
            _ => unreachable!("layout built from this domain"),
        }
        CellField {
            domain: domain.clone(),
            level,
            cells,
            increments,
            cumulative,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cells(&self) -> &CellLayout {
        &self.cells
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    fn resolvable(&self, a: &IndexSet) -> bool {
        match (a, &self.domain) {
            (IndexSet::Whole, Domain::Tree(tr)) => tr.max_depth() <= self.level,
            _ => self.domain.set_on_mesh(a, self.level),
        }
    }

    /// Value on a mesh atom, `None` if `a` is not resolved by the mesh.
    pub fn value(&self, a: &IndexSet) -> Option<f64> {
        match a {
            IndexSet::Empty => Some(0.0),
            IndexSet::Whole => match &self.domain {
                Domain::Box(_) => self.value(&self.domain.whole()),
                Domain::Tree(_) => self.resolvable(a).then(|| self.increments.iter().sum()),
            },
            IndexSet::Atom(t) => {
                let i = match (&self.cells, t) {
                    (CellLayout::Box(l), Point::Box(c)) => l.index_of_tip(c),
                    _ => self.cells.locate(&self.domain, t),
                }?;
                Some(self.cumulative[i])
            }
        }
    }

    /// Value on the atom whose tip is cell `i`'s tip.
    pub fn value_at_cell(&self, i: usize) -> f64 {
        self.cumulative[i]
    }

    /// `ΔF_C` for a mesh-aligned increment set.
    pub fn delta(&self, c: &IncrementSet) -> Result<f64> {
        if !c.constituents().all(|a| self.resolvable(a)) {
            return Err(Error::NotMeshAligned(self.level));
        }
        Ok(delta_h(
            &self.domain,
            |a: &IndexSet| self.value(a).unwrap_or(0.0),
            c,
        ))
    }

    /// Sum of cell increments over a list of cell indices.
    pub fn delta_cells(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&i| self.increments[i]).sum()
    }
}

/// A sample of `X` on the level-`n` mesh, truncated at `ε`.
#[derive(Clone, Debug)]
pub struct SamplePath {
    triplet: LevyTriplet,
    measure: Measure,
    eps: f64,
    seed: u64,
    stream: u64,
    masses: Vec<f64>,
    /// `σ ΔB_C` per cell.
    gaussian: Vec<f64>,
    jumps: JumpList,
    field: CellField,
}

impl SamplePath {
    pub fn triplet(&self) -> &LevyTriplet {
        &self.triplet
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn domain(&self) -> &Domain {
        self.field.domain()
    }

    pub fn level(&self) -> u32 {
        self.field.level()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn cell_masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn gaussian_cells(&self) -> &[f64] {
        &self.gaussian
    }

    pub fn jumps(&self) -> &JumpList {
        &self.jumps
    }

    pub fn field(&self) -> &CellField {
        &self.field
    }

    /// The compensator rate `∫_{ε<=|x|<=1} x ν(dx)` used by this path.
    pub fn compensator(&self) -> f64 {
        self.triplet.nu.compensator(self.eps)
    }

    /// `X_A` for a mesh atom.
    pub fn x(&self, a: &IndexSet) -> Result<f64> {
        self.field
            .value(a)
            .ok_or(Error::NotMeshAligned(self.level()))
    }

    /// `ΔX_C`.
    pub fn delta_x(&self, c: &IncrementSet) -> Result<f64> {
        self.field.delta(c)
    }

    /// `ΔX` over a disjoint union of mesh-aligned increment sets.
    pub fn delta_x_union(&self, union: &[IncrementSet]) -> Result<f64> {
        crate::measure::check_disjoint(self.domain(), union.iter())?;
        union.iter().map(|c| self.delta_x(c)).sum()
    }
}

/// Samples `X` on the level-`n` mesh of `domain`. Jumps with `|x| < ε`
/// from the stable part are dropped and compensated analytically; atoms
/// are always kept.
pub fn sample_path(
    triplet: &LevyTriplet,
    domain: &Domain,
    measure: &Measure,
    n: u32,
    eps: f64,
    seed: u64,
    stream: u64,
) -> Result<SamplePath> {
    triplet.validate()?;
    measure.validate(domain)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("truncation {eps}")));
    }
    let mut rng = path_rng(seed, stream);
    let cells = domain.cells(n);
    let masses = measure.cell_masses(domain, &cells);
    let sigma = triplet.sigma2.sqrt();

    let gaussian: Vec<f64> = masses
        .iter()
        .map(|&m| {
            if m > 0.0 && sigma > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                sigma * m.sqrt() * z
            } else {
                0.0
            }
        })
        .collect();

    let total_mass: f64 = masses.iter().sum();
    let rate = triplet.nu.mass_above(eps);
    let expected = total_mass * rate;
    let count = if expected > 0.0 {
        Poisson::new(expected)
            .map_err(|e| Error::InvalidParameter(format!("jump intensity {expected}: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };

    let sizes = JumpSizeSampler::new(&triplet.nu, eps)?;
    let mut jumps = JumpList::new(domain);
    jumps.sizes.reserve(count);
    jumps.cells.reserve(count);
    match (&cells, &mut jumps.locations) {
        (CellLayout::Box(lattice), Locations::Box { p, coords }) => {
            let top = *lattice.grid().last().unwrap();
            coords.reserve(count * *p);
            let mut x = vec![0.0; *p];
            for _ in 0..count {
                for xi in x.iter_mut() {
                    // uniform on (0, top]
                    *xi = top * (1.0 - rng.random::<f64>());
                }
                let cell = lattice.locate(&x).expect("inside the mesh extent");
                coords.extend_from_slice(&x);
                jumps.cells.push(cell);
                jumps.sizes.push(sizes.sample(&mut rng));
            }
        }
        (CellLayout::Tree { nodes, .. }, Locations::Tree(ids)) => {
            if count > 0 {
                let pick = WeightedIndex::new(&masses)
                    .map_err(|e| Error::InvalidParameter(format!("cell masses: {e}")))?;
                ids.reserve(count);
                for _ in 0..count {
                    let k = pick.sample(&mut rng);
                    ids.push(nodes[k]);
                    jumps.cells.push(k);
                    jumps.sizes.push(sizes.sample(&mut rng));
                }
            }
        }
        _ => unreachable!("jump list built from this domain"),
    }

    let mut jump_sums = vec![0.0; masses.len()];
    for (&c, &s) in jumps.cells.iter().zip(&jumps.sizes) {
        jump_sums[c] += s;
    }
    let comp = triplet.nu.compensator(eps);
    let increments: Vec<f64> = (0..masses.len())
        .map(|i| triplet.b * masses[i] + gaussian[i] + jump_sums[i] - masses[i] * comp)
        .collect();
    let field = CellField::new(domain, n, increments);
    Ok(SamplePath {
        triplet: triplet.clone(),
        measure: *measure,
        eps,
        seed,
        stream,
        masses,
        gaussian,
        jumps,
        field,
    })
}

/// Draws from `ν` restricted to `{|x| >= ε}`, normalized.
struct JumpSizeSampler {
    atoms: Vec<Atom>,
    atom_rate: f64,
    stable: Option<(f64, f64)>,
    stable_rate: f64,
}

impl JumpSizeSampler {
    fn new(nu: &LevyMeasureSpec, eps: f64) -> Result<Self> {
        let stable_rate = nu.stable_mass_above(eps);
        Ok(JumpSizeSampler {
            atoms: nu.atoms.clone(),
            atom_rate: nu.atom_rate(),
            stable: nu
                .stable
                .filter(|_| stable_rate > 0.0)
                .map(|s| (s.alpha, eps.powf(-s.alpha))),
            stable_rate,
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let total = self.atom_rate + self.stable_rate;
        let u: f64 = rng.random::<f64>() * total;
        if u < self.atom_rate || self.stable.is_none() {
            let mut acc = 0.0;
            for a in &self.atoms {
                acc += a.rate;
                if u < acc {
                    return a.x;
                }
            }
            return self.atoms.last().map_or(0.0, |a| a.x);
        }
        let (alpha, e) = self.stable.unwrap();
        let v: f64 = rng.random();
        let mag = (v * (1.0 - e) + e).powf(-1.0 / alpha);
        if rng.random::<bool>() {
            mag
        } else {
            -mag
        }
    }
}
