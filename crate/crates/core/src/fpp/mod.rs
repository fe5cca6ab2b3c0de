//! First-passage percolation on the random geometric graph.

pub mod estimators;
pub mod geodesics;
pub mod passage;
pub mod shape;
pub mod weights;

pub use geodesics::{geodesic_deviation, straightness_report, StraightnessReport};
pub use passage::{dijkstra, extract_geodesic, first_passage, passage_time_between, FirstPassageResult, WeightedGraph};
pub use shape::{shape_statistics, ShapeProbe, ShapeStats};
pub use weights::{assign_weights, ConditionFlags, PassageField, WeightDistribution};
