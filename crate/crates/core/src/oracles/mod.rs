//! Independent ground truth: the homogeneous 3/2 profile and an exhaustive
//! contact-pattern solver for tiny grids.

mod brute_force;
mod exact;

use thiserror::Error;

pub use brute_force::{brute_force_solve, BruteForceSolution, MAX_ENUMERATED_THIN};
pub use exact::ExactSignoriniSolution;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("amplitude must be positive and finite, got {0}")]
    InvalidAmplitude(f64),
    #[error("invalid extrusion axis {axis} for dimension {dim}")]
    InvalidAxis { dim: usize, axis: usize },
    #[error("oracle self-check failed: {0}")]
    Construction(String),
    #[error("grid has {found} thin nodes, enumeration supports at most {max}")]
    TooManyThinNodes { found: usize, max: usize },
    #[error("no contact pattern is feasible")]
    NoFeasiblePattern,
    #[error("boundary data: {0}")]
    Boundary(String),
}
