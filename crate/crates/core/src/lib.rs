//! Exact lattice-polytope geometry and the classification of polytope tuples
//! with small normalized mixed volume.

pub mod classification;
pub mod equivalence;
pub mod error;
pub mod exec;
pub mod io;
pub mod lattice;
pub mod maximality;
pub mod mixed;
pub mod polytope;
pub mod sandwich;

pub use error::{Error, Result};
pub use lattice::{IntVector, PrimitiveVector, Rational};
pub use polytope::LatticePolytope;
