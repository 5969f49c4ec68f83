use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{HalfGrid, NodeClass, Point, ScalarField};
use crate::oracles::ExactSignoriniSolution;

use super::SolveError;

/// Named generator for the Dirichlet data `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    /// `g = amplitude * r^{3/2} cos(3 theta / 2)`.
    OracleTrace {
        amplitude: f64,
        #[serde(default = "default_extrusion_axis")]
        extrusion_axis: usize,
    },
    Constant { value: f64 },
    /// Node table on the canonical half-box, extended multilinearly.
    CustomTable { nodes_per_axis: Vec<usize>, values: Vec<f64> },
}

fn default_extrusion_axis() -> usize {
    1
}

#[derive(Debug, Clone)]
enum Generator {
    Oracle(ExactSignoriniSolution),
    Constant(f64),
    Table(ScalarField),
}

/// Dirichlet data `g`, defined on the whole closed half-box.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    generator: Generator,
    /// Require `g >= 0` on the rim of the thin face.
    pub thin_trace_nonneg: bool,
}

impl BoundaryData {
    pub fn constant(value: f64) -> Self {
        Self { generator: Generator::Constant(value), thin_trace_nonneg: true }
    }

    pub fn oracle(solution: ExactSignoriniSolution) -> Self {
        Self { generator: Generator::Oracle(solution), thin_trace_nonneg: true }
    }

    pub fn table(field: ScalarField) -> Self {
        Self { generator: Generator::Table(field), thin_trace_nonneg: true }
    }

    pub fn from_spec(spec: &BoundarySpec, dim: usize) -> Result<Self, SolveError> {
        match spec {
            BoundarySpec::OracleTrace { amplitude, extrusion_axis } => {
                let axis = if dim == 2 { 0 } else { *extrusion_axis };
                let sol = ExactSignoriniSolution::new(*amplitude, dim, axis)
                    .map_err(|e| SolveError::InvalidBoundary(e.to_string()))?;
                Ok(Self::oracle(sol))
            }
            BoundarySpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(SolveError::InvalidBoundary(format!("constant {value} is not finite")));
                }
                Ok(Self::constant(*value))
            }
            BoundarySpec::CustomTable { nodes_per_axis, values } => {
                let grid = HalfGrid::new(dim, nodes_per_axis).map_err(|e| SolveError::InvalidBoundary(e.to_string()))?;
                let field = ScalarField::new(Arc::new(grid), values.clone())
                    .map_err(|e| SolveError::InvalidBoundary(e.to_string()))?;
                Ok(Self::table(field))
            }
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match &self.generator {
            Generator::Oracle(s) => s.value(x),
            Generator::Constant(c) => *c,
            // wrong-dimension tables are caught by `validate`; NaN surfaces there
            Generator::Table(f) => f.interpolate(x).unwrap_or(f64::NAN),
        }
    }

    pub fn exact_solution(&self) -> Option<&ExactSignoriniSolution> {
        match &self.generator {
            Generator::Oracle(s) => Some(s),
            _ => None,
        }
    }

    /// Checks `g` on the Dirichlet nodes of `grid`.
    pub fn validate(&self, grid: &HalfGrid) -> Result<(), SolveError> {
        if let Generator::Table(f) = &self.generator {
            if f.grid().dim() != grid.dim() {
                return Err(SolveError::InvalidBoundary(format!(
                    "table has dimension {}, grid {}",
                    f.grid().dim(),
                    grid.dim()
                )));
            }
        }
        let dim = grid.dim();
        for i in 0..grid.node_count() {
            if grid.class(i) != NodeClass::Dirichlet {
                continue;
            }
            let x = grid.coords(i);
            let g = self.eval(&x);
            if !g.is_finite() {
                return Err(SolveError::InvalidBoundary(format!("g is not finite at {:?}", &x[..dim])));
            }
            if self.thin_trace_nonneg && x[dim - 1] == 0.0 && g < 0.0 {
                return Err(SolveError::InvalidBoundary(format!(
                    "g = {g} < 0 on the thin-face rim at {:?}",
                    &x[..dim]
                )));
            }
        }
        Ok(())
    }
}
