//! Browser bindings for the demo page in `www/`. A [`Demo`] solves one 2D
//! benchmark (oracle trace scaled by an amplitude) and then answers
//! queries for the field, its frequency curve and its decay table as JSON.

use std::sync::Arc;

use serde::Serialize;
use thinobs::analysis::{extract_contact_set, frequency_profile, radius_ladder, CenterRule};
use thinobs::experiment::{decay_table, DecayRow};
use thinobs::geometry::{GridSampler, HalfGrid, HemisphereRule, NodeClass, Point};
use thinobs::nonlinearity::{NonlinearityModel, NonlinearitySpec};
use thinobs::oracles::ExactSignoriniSolution;
use thinobs::solver::{solve_signorini, SolveConfig, SolveReport};
use wasm_bindgen::prelude::*;

const MIN_NODES: usize = 17;
const MAX_NODES: usize = 257;

pub struct Session {
    model: NonlinearityModel,
    sampler: GridSampler,
    report: SolveReport,
    center: Point,
    rule: HemisphereRule,
}

#[derive(Serialize)]
struct FieldView<'a> {
    nx: usize,
    ny: usize,
    /// Node values, `x` index major: `values[i * ny + j]` sits at node `(i, j)`.
    values: &'a [f64],
    min: f64,
    max: f64,
    contact: Vec<f64>,
    center: [f64; 2],
    iterations: usize,
    kkt: f64,
    tol_kkt: f64,
    energy: f64,
}

#[derive(Serialize)]
struct FrequencyPoint {
    rho: f64,
    n: f64,
    doubling: f64,
    untrusted: bool,
}

#[derive(Serialize)]
struct DecayView {
    rows: Vec<DecayRow>,
    l2_slope: f64,
    sup_slope: f64,
    sup_gradient_slope: f64,
}

fn model_from_name(name: &str) -> Result<NonlinearityModel, String> {
    let spec = match name {
        "quadratic" => NonlinearitySpec::Quadratic,
        "minimal_surface" => NonlinearitySpec::MinimalSurface,
        "perturbed_quadratic" => NonlinearitySpec::PerturbedQuadratic { c: 0.1 },
        other => return Err(format!("unknown model `{other}`")),
    };
    spec.build().map_err(|e| e.to_string())
}

impl Session {
    /// Solves on a `nx x (nx + 1) / 2` grid; `nx` must be odd.
    pub fn open(model: &str, amplitude: f64, nx: usize) -> Result<Self, String> {
        if !(MIN_NODES..=MAX_NODES).contains(&nx) || nx.is_multiple_of(2) {
            return Err(format!("grid size must be odd and within [{MIN_NODES}, {MAX_NODES}], got {nx}"));
        }
        if !(amplitude > 0.0 && amplitude <= 2.0) {
            return Err(format!("amplitude must lie in (0, 2], got {amplitude}"));
        }
        let model = model_from_name(model)?;
        let grid = Arc::new(HalfGrid::new(2, &[nx, nx.div_ceil(2)]).map_err(|e| e.to_string())?);
        let data = thinobs::solver::BoundaryData::oracle(ExactSignoriniSolution::planar(amplitude).map_err(|e| e.to_string())?);
        let cfg = SolveConfig::default();
        let (u, report) = solve_signorini(&grid, &model, &data, &cfg).map_err(|e| e.to_string())?;
        let fb = extract_contact_set(&u, 10.0 * report.tol_kkt).map_err(|e| e.to_string())?;
        let center = fb.center(CenterRule::EdgeCrossing, &[0.0; 3]).unwrap_or([0.0; 3]);
        let rule = HemisphereRule::default_for(2).map_err(|e| e.to_string())?;
        Ok(Self { model, sampler: GridSampler::new(u), report, center, rule })
    }

    pub fn field_json(&self) -> String {
        let u = self.sampler.field();
        let g = u.grid();
        let n = g.nodes_per_axis();
        let values = u.values();
        let active: std::collections::HashSet<usize> = self.report.active_set.iter().copied().collect();
        let contact = g.nodes_of(NodeClass::Thin).into_iter().filter(|i| active.contains(i)).map(|i| g.coords(i)[0]).collect();
        let view = FieldView {
            nx: n[0],
            ny: n[1],
            values,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            contact,
            center: [self.center[0], self.center[1]],
            iterations: self.report.iterations,
            kkt: self.report.kkt.max(),
            tol_kkt: self.report.tol_kkt,
            energy: self.report.energy_history.last().copied().unwrap_or(f64::NAN),
        };
        serde_json::to_string(&view).expect("view serializes")
    }

    pub fn frequency_json(&self, rho_min: f64, rho_max: f64) -> Result<String, String> {
        let radii = self.radii(rho_min, rho_max)?;
        let p = frequency_profile(&self.sampler, &self.model, &self.rule, &self.center, &radii).map_err(|e| e.to_string())?;
        let points: Vec<FrequencyPoint> =
            p.rows.iter().map(|r| FrequencyPoint { rho: r.rho, n: r.n, doubling: r.doubling, untrusted: r.untrusted }).collect();
        Ok(serde_json::to_string(&points).expect("curve serializes"))
    }

    pub fn decay_json(&self, rho_min: f64, rho_max: f64) -> Result<String, String> {
        let radii = self.radii(rho_min, rho_max)?;
        let (rows, s) = decay_table(&self.sampler, &self.rule, &self.center, &radii).map_err(|e| e.to_string())?;
        let view = DecayView { rows, l2_slope: s[0], sup_slope: s[1], sup_gradient_slope: s[2] };
        Ok(serde_json::to_string(&view).expect("table serializes"))
    }

    fn radii(&self, rho_min: f64, rho_max: f64) -> Result<Vec<f64>, String> {
        let reach = 1.0 - self.center[0].abs();
        if rho_max > reach {
            return Err(format!("rho_max {rho_max} leaves the box (at most {reach:.3})"));
        }
        radius_ladder(rho_min, rho_max).map_err(|e| e.to_string())
    }
}

#[wasm_bindgen]
pub struct Demo(Session);

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(model: &str, amplitude: f64, nodes: u32) -> Result<Demo, JsError> {
        Session::open(model, amplitude, nodes as usize).map(Demo).map_err(|e| JsError::new(&e))
    }

    pub fn field(&self) -> String {
        self.0.field_json()
    }

    pub fn frequency(&self, rho_min: f64, rho_max: f64) -> Result<String, JsError> {
        self.0.frequency_json(rho_min, rho_max).map_err(|e| JsError::new(&e))
    }

    pub fn decay(&self, rho_min: f64, rho_max: f64) -> Result<String, JsError> {
        self.0.decay_json(rho_min, rho_max).map_err(|e| JsError::new(&e))
    }
}
