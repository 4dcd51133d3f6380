//! hp finite elements in space and discontinuous Galerkin in time for the
//! heat equation on the unit square, with equilibrated-flux a posteriori
//! error estimators and numerical checks of the associated bounds.

pub mod basis;
pub mod error;
pub mod estimators;
pub mod flux;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod reconstruction;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
