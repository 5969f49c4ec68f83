//! Half-box lattices, node fields, and hemisphere quadrature.

mod field;
mod format;
mod grid;
mod quadrature;

pub use field::{AnalyticField, FieldSampler, GridSampler, ScalarField, Scaled, VectorField};
pub use format::{read_field, read_field_file, write_field, write_field_file, THOB_MAGIC, THOB_VERSION};
pub use grid::{HalfGrid, Lattice, NodeClass};
pub use quadrature::{
    gauss_legendre, pairwise_sum, HemisphereQuadrature, HemisphereRule, DEFAULT_ANGULAR, DEFAULT_RADIAL,
};

use thiserror::Error;

/// A point or vector; components past the grid dimension are zero.
pub type Point = [f64; 3];

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension {0} unsupported (expected 2 or 3)")]
    UnsupportedDim(usize),
    #[error("dimension {dim} needs {dim} node counts, got {given}")]
    AxisCount { dim: usize, given: usize },
    #[error("axis {axis}: node count {nodes} is even; the origin must be a lattice node")]
    EvenNodeCount { axis: usize, nodes: usize },
    #[error("axis {axis}: {nodes} nodes, at least {min} required")]
    TooFewNodes { axis: usize, nodes: usize, min: usize },
    #[error("expected {expected} node values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("node {0} carries a non-finite value")]
    NonFiniteValue(usize),
    #[error("point {0:?} lies outside the grid extent")]
    OutOfExtent(Vec<f64>),
    #[error("radius {0} must be positive and finite")]
    InvalidRadius(f64),
    #[error("center {0:?} is not on the thin plane")]
    CenterOffPlane(Vec<f64>),
    #[error("field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
