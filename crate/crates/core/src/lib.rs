//! Lattice cohomology of curve singularities computed from their good semigroups.

pub mod analysis;
pub mod cohomology;
pub mod corpus;
pub mod cubical;
pub mod error;
pub mod grid;
pub mod ingest;
pub mod invariants;
pub mod lattice;
pub mod linalg;
pub mod semigroup;
pub mod smith;

pub use error::{Error, Result};
pub use lattice::{GridShape, LatticeBox, LatticePoint};
pub use semigroup::{pt, Axiom, GoodSemigroup, Multiplicity, SemigroupFile, ValidationReport, Violation};
