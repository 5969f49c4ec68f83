//! Bound-constrained minimization of the discrete energy with `u >= 0` on
//! thin nodes and `u = g` on Dirichlet nodes.

mod boundary;
mod cg;
mod energy;
mod newton;
mod projected_gradient;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boundary::{BoundaryData, BoundarySpec};
pub use cg::{pcg, CgOutcome};
pub use energy::{EnergyOperator, Linearization};

use crate::geometry::{HalfGrid, NodeClass, ScalarField};
use crate::nonlinearity::NonlinearityModel;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("boundary data: {0}")]
    InvalidBoundary(String),
    #[error("solver configuration: {0}")]
    InvalidConfig(String),
    #[error("not converged after {} iterations (kkt max {:.3e})", .report.iterations, .report.kkt.max())]
    NonConverged { field: Box<ScalarField>, report: Box<SolveReport> },
    #[error("ill-posed: {reason}")]
    IllPosed { reason: String, field: Box<ScalarField>, report: Box<SolveReport> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ProjectedGradient,
    ActiveSetNewton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// `g` evaluated at every node, clipped to `>= 0` on the thin face.
    BoundaryExtension,
    /// Zero on free nodes.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    /// Defaults to 1e-8 for the quadratic model and 1e-6 otherwise.
    #[serde(default)]
    pub tol_kkt: Option<f64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Relative residual target of the inner conjugate-gradient solves.
    #[serde(default = "default_linear_tol")]
    pub linear_tol: f64,
    /// Sufficient-decrease constant of the line searches.
    #[serde(default = "default_armijo")]
    pub armijo: f64,
    #[serde(default = "default_bb_min")]
    pub bb_min: f64,
    #[serde(default = "default_bb_max")]
    pub bb_max: f64,
    #[serde(default = "default_initial")]
    pub initial: InitialGuess,
}

fn default_method() -> Method {
    Method::ActiveSetNewton
}
fn default_max_iterations() -> usize {
    500
}
fn default_linear_tol() -> f64 {
    1e-10
}
fn default_armijo() -> f64 {
    1e-4
}
fn default_bb_min() -> f64 {
    1e-10
}
fn default_bb_max() -> f64 {
    1e10
}
fn default_initial() -> InitialGuess {
    InitialGuess::BoundaryExtension
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            tol_kkt: None,
            max_iterations: default_max_iterations(),
            linear_tol: default_linear_tol(),
            armijo: default_armijo(),
            bb_min: default_bb_min(),
            bb_max: default_bb_max(),
            initial: default_initial(),
        }
    }
}

impl SolveConfig {
    pub fn projected_gradient() -> Self {
        Self { method: Method::ProjectedGradient, max_iterations: 200_000, ..Self::default() }
    }

    pub fn tolerance_for(&self, model: &NonlinearityModel) -> f64 {
        self.tol_kkt.unwrap_or(if model.is_quadratic() { 1e-8 } else { 1e-6 })
    }

    fn validate(&self, model: &NonlinearityModel) -> Result<(), SolveError> {
        let tol = self.tolerance_for(model);
        if !(tol > 0.0) || !(self.linear_tol > 0.0) || self.max_iterations == 0 {
            return Err(SolveError::InvalidConfig(
                "tolerances must be positive and max_iterations >= 1".into(),
            ));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) || !(self.bb_min > 0.0 && self.bb_min < self.bb_max) {
            return Err(SolveError::InvalidConfig("step rule parameters out of range".into()));
        }
        Ok(())
    }
}

/// Max-norm KKT residuals of a discrete iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `max |dE/du_i|` over interior nodes.
    pub interior_residual_inf: f64,
    /// `max |min(u_i, sigma_i)|` over thin nodes.
    pub thin_complementarity_inf: f64,
    /// Largest of the thin-node violation `max(-u_i, 0)` and `|u_i - g_i|`
    /// on Dirichlet nodes.
    pub feasibility_inf: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.interior_residual_inf.max(self.thin_complementarity_inf).max(self.feasibility_inf)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Converged,
    NonConverged,
    IllPosed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub status: SolveStatus,
    pub tol_kkt: f64,
    pub iterations: usize,
    pub linear_iterations: usize,
    pub energy_history: Vec<f64>,
    pub kkt: KktResiduals,
    /// Thin nodes in numbering order.
    pub thin_nodes: Vec<usize>,
    /// `dE/du_i` on each thin node: the conormal flux `-grad_p f . e_n`
    /// integrated against the node's boundary measure.
    pub sigma_n: Vec<f64>,
    /// `sigma_n` divided by the boundary measure (a flux density).
    pub normal_flux: Vec<f64>,
    /// Thin nodes with `u = 0`.
    pub active_set: Vec<usize>,
    /// Active nodes with `|u| <= 1e-12` and `|sigma_n| <= tol_kkt`.
    pub degenerate_set: Vec<usize>,
    pub max_gradient_norm: f64,
    /// The iterate's gradient range leaves the model's small-gradient radius.
    pub exceeds_t_bar: bool,
    /// Smallest Hessian eigenvalue of `f` over the iterate's gradient range.
    pub ellipticity_floor: f64,
}

/// Free-variable layout shared by the methods.
pub(crate) struct Problem<'a> {
    pub grid: &'a HalfGrid,
    pub op: EnergyOperator,
    pub dirichlet: Vec<f64>,
    pub tol: f64,
}

impl Problem<'_> {
    pub fn is_free(&self, i: usize) -> bool {
        self.grid.class(i) != NodeClass::Dirichlet
    }

    pub fn is_thin(&self, i: usize) -> bool {
        self.grid.class(i) == NodeClass::Thin
    }

    /// Energy gradient with Dirichlet entries zeroed.
    pub fn masked_gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.op.gradient(u);
        for (i, gi) in g.iter_mut().enumerate() {
            if !self.is_free(i) {
                *gi = 0.0;
            }
        }
        g
    }

    pub fn project(&self, u: &mut [f64]) {
        for (i, ui) in u.iter_mut().enumerate() {
            match self.grid.class(i) {
                NodeClass::Thin => *ui = ui.max(0.0),
                NodeClass::Dirichlet => *ui = self.dirichlet[i],
                NodeClass::Interior => {}
            }
        }
    }

    pub fn kkt(&self, u: &[f64], grad: &[f64]) -> KktResiduals {
        kkt_from_gradient(self.grid, u, grad, &self.dirichlet)
    }

    /// `max |x - P(x - g)|` over free nodes.
    pub fn projected_gradient_norm(&self, u: &[f64], grad: &[f64]) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..u.len() {
            let step = match self.grid.class(i) {
                NodeClass::Interior => grad[i],
                NodeClass::Thin => u[i] - (u[i] - grad[i]).max(0.0),
                NodeClass::Dirichlet => 0.0,
            };
            m = m.max(step.abs());
        }
        m
    }
}

fn kkt_from_gradient(grid: &HalfGrid, u: &[f64], grad: &[f64], dirichlet: &[f64]) -> KktResiduals {
    let mut k = KktResiduals { interior_residual_inf: 0.0, thin_complementarity_inf: 0.0, feasibility_inf: 0.0 };
    for i in 0..u.len() {
        match grid.class(i) {
            NodeClass::Interior => k.interior_residual_inf = k.interior_residual_inf.max(grad[i].abs()),
            NodeClass::Thin => {
                k.thin_complementarity_inf = k.thin_complementarity_inf.max(u[i].min(grad[i]).abs());
                k.feasibility_inf = k.feasibility_inf.max((-u[i]).max(0.0));
            }
            NodeClass::Dirichlet => k.feasibility_inf = k.feasibility_inf.max((u[i] - dirichlet[i]).abs()),
        }
    }
    k
}

/// `E(u) = sum_cells |cell| avg_corners f(grad u)`.
pub fn discrete_energy(u: &ScalarField, model: &NonlinearityModel) -> f64 {
    EnergyOperator::new(u.grid().lattice(), *model).energy(u.values())
}

/// Gradient of [`discrete_energy`] with Dirichlet entries set to zero. At a
/// thin node the entry is the conormal flux times the node's boundary
/// measure.
pub fn discrete_residual(u: &ScalarField, model: &NonlinearityModel) -> Vec<f64> {
    let op = EnergyOperator::new(u.grid().lattice(), *model);
    let mut r = op.gradient(u.values());
    for (i, ri) in r.iter_mut().enumerate() {
        if u.grid().class(i) == NodeClass::Dirichlet {
            *ri = 0.0;
        }
    }
    r
}

/// KKT residuals of `u` for Dirichlet data `g`.
pub fn kkt_residuals(u: &ScalarField, model: &NonlinearityModel, g: &BoundaryData) -> KktResiduals {
    let grid = u.grid();
    let grad = discrete_residual(u, model);
    let dirichlet = dirichlet_values(grid, g);
    kkt_from_gradient(grid, u.values(), &grad, &dirichlet)
}

fn dirichlet_values(grid: &HalfGrid, g: &BoundaryData) -> Vec<f64> {
    (0..grid.node_count())
        .map(|i| if grid.class(i) == NodeClass::Dirichlet { g.eval(&grid.coords(i)) } else { 0.0 })
        .collect()
}

pub fn initial_iterate(grid: &HalfGrid, g: &BoundaryData, guess: InitialGuess) -> Vec<f64> {
    (0..grid.node_count())
        .map(|i| {
            let x = grid.coords(i);
            match (grid.class(i), guess) {
                (NodeClass::Dirichlet, _) => g.eval(&x),
                (_, InitialGuess::Zero) => 0.0,
                (NodeClass::Thin, InitialGuess::BoundaryExtension) => g.eval(&x).max(0.0),
                (NodeClass::Interior, InitialGuess::BoundaryExtension) => g.eval(&x),
            }
        })
        .collect()
}

/// Minimizes the discrete energy over `{u = g on Dirichlet, u >= 0 on thin}`.
pub fn solve_signorini(
    grid: &Arc<HalfGrid>,
    model: &NonlinearityModel,
    g: &BoundaryData,
    cfg: &SolveConfig,
) -> Result<(ScalarField, SolveReport), SolveError> {
    cfg.validate(model)?;
    g.validate(grid)?;
    let problem = Problem {
        grid,
        op: EnergyOperator::new(grid.lattice(), *model),
        dirichlet: dirichlet_values(grid, g),
        tol: cfg.tolerance_for(model),
    };
    let mut u = initial_iterate(grid, g, cfg.initial);
    problem.project(&mut u);

    let run = match cfg.method {
        Method::ProjectedGradient => projected_gradient::run(&problem, cfg, &mut u),
        Method::ActiveSetNewton => newton::run(&problem, cfg, &mut u),
    };

    let grad = problem.masked_gradient(&u);
    let kkt = problem.kkt(&u, &grad);
    let converged = kkt.within(problem.tol);
    let status = match (&run.failure, converged) {
        (_, true) => SolveStatus::Converged,
        (Some(_), false) => SolveStatus::IllPosed,
        (None, false) => SolveStatus::NonConverged,
    };
    let report = build_report(&problem, cfg.method, status, &u, &grad, kkt, run.iterations, run.linear_iterations, run.energy_history);
    let field = ScalarField::new(grid.clone(), u).expect("iterate stays finite");
    match status {
        SolveStatus::Converged => Ok((field, report)),
        SolveStatus::NonConverged => Err(SolveError::NonConverged { field: Box::new(field), report: Box::new(report) }),
        SolveStatus::IllPosed => Err(SolveError::IllPosed {
            reason: run.failure.unwrap_or_default(),
            field: Box::new(field),
            report: Box::new(report),
        }),
    }
}

pub(crate) struct RunOutcome {
    pub iterations: usize,
    pub linear_iterations: usize,
    pub energy_history: Vec<f64>,
    pub failure: Option<String>,
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    problem: &Problem<'_>,
    method: Method,
    status: SolveStatus,
    u: &[f64],
    grad: &[f64],
    kkt: KktResiduals,
    iterations: usize,
    linear_iterations: usize,
    energy_history: Vec<f64>,
) -> SolveReport {
    let grid = problem.grid;
    let thin_nodes = grid.nodes_of(NodeClass::Thin);
    let weight = grid.thin_weight();
    let sigma_n: Vec<f64> = thin_nodes.iter().map(|&i| grad[i]).collect();
    let normal_flux = sigma_n.iter().map(|s| s / weight).collect();
    let active_set: Vec<usize> = thin_nodes.iter().copied().filter(|&i| u[i] <= 1e-12).collect();
    let degenerate_set =
        active_set.iter().copied().filter(|&i| u[i].abs() <= 1e-12 && grad[i].abs() <= problem.tol).collect();
    let max_gradient_norm = problem.op.max_gradient_norm(u);
    let model = problem.op.model();
    SolveReport {
        method,
        status,
        tol_kkt: problem.tol,
        iterations,
        linear_iterations,
        energy_history,
        kkt,
        thin_nodes,
        sigma_n,
        normal_flux,
        active_set,
        degenerate_set,
        max_gradient_norm,
        exceeds_t_bar: max_gradient_norm > model.t_bar,
        ellipticity_floor: model.ellipticity_floor(max_gradient_norm),
    }
}
