//! Concrete indexing collections: the box lattice `A(t) = [0, t]` on
//! `[0, side]^p` and the ancestor sets of a finite rooted tree.
//!
//! Sets of the collection are never stored as point sets. Every non-empty
//! set is identified with its tip, so inclusion is the partial order on
//! points and intersection is the meet.

mod domain;
mod metric;
mod sets;

pub use domain::{BoxDomain, BoxLattice, CellLayout, Domain, MeshLevel, TreeDomain, TreeSpec};
pub use metric::{
    d_a, d_c, divergence, divergence_field, divergence_mesh, geodesic, mesh_delta, victiny_n,
    Divergence, DivergenceField, MetricKind, Victiny,
};
pub use sets::{IncrementSet, IndexSet, Point};
