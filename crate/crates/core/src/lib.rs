//! Slope calculus for filtered objects: concave types with dominance order
//! and convex sums, valued-ring linear algebra (Smith forms, lattice
//! distances, torsion invariants), and a generic Harder-Narasimhan engine
//! with the Hodge / Newton / Fargues type computations built on top of it.

pub mod checks;
pub mod error;
pub mod hn;
pub mod linalg;
pub mod parse;
pub mod phimod;
pub mod rat;

pub mod polygon;
pub mod rings;
pub mod slopes;

pub use error::{Error, Result};
