//! Exact analysis of polyhedral cones spanned by rank-1 quadratic forms.
//!
//! The crate decides basicness and simpliciality of cones `sum R+ v v^t`,
//! tests whether a vector configuration is the complete set of minimal
//! vectors of some lattice, classifies cones up to `GL_g(Z)` and checks the
//! small-genus structure of the perfect cone and second Voronoi
//! decompositions. Every decision is made in exact integer or rational
//! arithmetic.

pub mod checks;
pub mod classify;
pub mod cone;
pub mod domains;
pub mod equiv;
pub mod error;
pub mod exactlinalg;
pub mod forms;
pub mod minvec;
pub mod realize;
pub mod voronoi2;

pub use error::{Error, Result};
