use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

/// A point of the indexing space.
///
/// Box points are coordinate vectors in `R_+^p`. Tree points are Neveu
/// paths: the root is `[]` and `[1, 3]` is the third child of the first
/// child of the root.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Point {
    Box(Vec<f64>),
    Tree(Vec<u32>),
}

impl Point {
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Box(c) => Some(c),
            Point::Tree(_) => None,
        }
    }

    pub fn node(&self) -> Option<&[u32]> {
        match self {
            Point::Tree(n) => Some(n),
            Point::Box(_) => None,
        }
    }

    /// Lexicographic order on tips, used for canonical forms.
    pub fn canonical_cmp(&self, other: &Point) -> Ordering {
        match (self, other) {
            (Point::Box(a), Point::Box(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
            (Point::Tree(a), Point::Tree(b)) => a.cmp(b),
            (Point::Box(_), Point::Tree(_)) => Ordering::Less,
            (Point::Tree(_), Point::Box(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Box(c) => write!(f, "{c:?}"),
            Point::Tree(n) if n.is_empty() => write!(f, "root"),
            Point::Tree(n) => {
                let parts: Vec<String> = n.iter().map(u32::to_string).collect();
                write!(f, "{}", parts.join("."))
            }
        }
    }
}

/// An element of the indexing collection.
///
/// `Atom(t)` is `A(t)`; `Atom(0)` plays the role of the global minimum
/// `A(0)`. `Whole` is the full space when it is not itself an atom (trees
/// with several leaves); box domains always normalize it to the atom of the
/// upper corner.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum IndexSet {
    Empty,
    Atom(Point),
    Whole,
}

impl IndexSet {
    pub fn tip(&self) -> Option<&Point> {
        match self {
            IndexSet::Atom(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, IndexSet::Empty)
    }

    pub fn atom(coords: &[f64]) -> Self {
        IndexSet::Atom(Point::Box(coords.to_vec()))
    }

    pub fn node(path: &[u32]) -> Self {
        IndexSet::Atom(Point::Tree(path.to_vec()))
    }

    pub(crate) fn canonical_cmp(&self, other: &IndexSet) -> Ordering {
        match (self, other) {
            (IndexSet::Atom(a), IndexSet::Atom(b)) => a.canonical_cmp(b),
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

fn rank(a: &IndexSet) -> u8 {
    match a {
        IndexSet::Empty => 0,
        IndexSet::Atom(_) => 1,
        IndexSet::Whole => 2,
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::Empty => write!(f, "∅"),
            IndexSet::Atom(t) => write!(f, "A({t})"),
            IndexSet::Whole => write!(f, "T"),
        }
    }
}

/// `a0 \ (A_1 ∪ … ∪ A_k)` in extremal form: every `A_i` is a proper
/// subset of `a0`, the `A_i` are pairwise incomparable, and they are sorted
/// by tip. The empty point set is `a0 = Empty` with nothing subtracted.
///
/// Build these through [`Domain::extremal_rep`](super::Domain::extremal_rep)
/// so the invariants hold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncrementSet {
    pub(crate) a0: IndexSet,
    pub(crate) subtracted: Vec<IndexSet>,
}

impl IncrementSet {
    pub fn empty() -> Self {
        IncrementSet {
            a0: IndexSet::Empty,
            subtracted: Vec::new(),
        }
    }

    pub fn a0(&self) -> &IndexSet {
        &self.a0
    }

    pub fn subtracted(&self) -> &[IndexSet] {
        &self.subtracted
    }

    pub fn is_empty(&self) -> bool {
        self.a0.is_empty()
    }

    /// `{A_0, A_1, …, A_k}`, the constituent list used by `d_C`.
    pub fn constituents(&self) -> impl Iterator<Item = &IndexSet> {
        std::iter::once(&self.a0).chain(self.subtracted.iter())
    }
}

impl fmt::Display for IncrementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.a0)?;
        if !self.subtracted.is_empty() {
            let parts: Vec<String> = self.subtracted.iter().map(|a| a.to_string()).collect();
            write!(f, " \\ ({})", parts.join(" ∪ "))?;
        }
        Ok(())
    }
}
