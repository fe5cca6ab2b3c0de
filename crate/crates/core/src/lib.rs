//! Simulation laboratory for first-passage percolation on random geometric
//! graphs and on the discrete Heisenberg group.

pub mod augmented;
pub mod competition;
pub mod error;
pub mod experiments;
pub mod fpp;
pub mod graph;
pub mod grid;
pub mod heisenberg;
pub mod persist;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{GeoGraph, StructureParams, StructureReport};
pub use sampling::{PointSet, SimConfig};
