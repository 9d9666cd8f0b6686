//! First-passage percolation on the square lattice: sampling, passage times,
//! optimal-path counting and critical percolation geometry.

pub mod cluster_stats;
pub mod critical_geometry;
pub mod error;
pub mod estimators;
pub mod geodesics;
pub mod lattice;
pub mod passage;
pub mod random_field;

pub use error::{Error, Result};
