use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    extract_contact_set, frequency_profile, monotonicity_fit, radius_ladder, symmetrize_and_check, MonotonicityStatus,
    Parity, DEFAULT_C_MAX,
};
use crate::geometry::{read_field, write_field, AnalyticField, HalfGrid, HemisphereRule, NodeClass, ScalarField};
use crate::nonlinearity::{verify_structure, NonlinearityModel};
use crate::oracles::{brute_force_solve, ExactSignoriniSolution};
use crate::solver::{discrete_energy, discrete_residual, solve_signorini, BoundaryData, SolveConfig};

use super::{digest_value, ExperimentError};

/// Brute-force solution on a small grid next to the solver's.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleComparison {
    pub nodes_per_axis: Vec<usize>,
    pub model: String,
    pub oracle_energy: f64,
    pub solver_energy: f64,
    pub energy_difference: f64,
    pub max_field_difference: f64,
    pub pattern: Vec<usize>,
    pub feasible_patterns: usize,
    pub runner_up_gap: Option<f64>,
    #[serde(skip)]
    pub oracle_field: Option<ScalarField>,
}

/// Parses `5x3` or `9x9x5`.
pub fn parse_grid(text: &str) -> Result<Vec<usize>, ExperimentError> {
    let nodes: Result<Vec<usize>, _> = text.split(['x', 'X']).map(|s| s.trim().parse::<usize>()).collect();
    match nodes {
        Ok(n) if n.len() == 2 || n.len() == 3 => Ok(n),
        _ => Err(ExperimentError::Config(format!("grid `{text}`: expected NxM or NxMxK"))),
    }
}

pub fn oracle_comparison(
    nodes: &[usize],
    model: &NonlinearityModel,
    data: &BoundaryData,
    cfg: &SolveConfig,
) -> Result<OracleComparison, ExperimentError> {
    let grid = Arc::new(HalfGrid::new(nodes.len(), nodes).map_err(|e| ExperimentError::Config(format!("grid: {e}")))?);
    let oracle = brute_force_solve(&grid, model, data).map_err(|e| ExperimentError::Config(format!("oracle: {e}")))?;
    let (u, _) = solve_signorini(&grid, model, data, cfg).map_err(|e| ExperimentError::Solve(e.to_string()))?;
    let solver_energy = discrete_energy(&u, model);
    let max_field_difference =
        u.values().iter().zip(oracle.field.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(OracleComparison {
        nodes_per_axis: nodes.to_vec(),
        model: model.name().into(),
        oracle_energy: oracle.energy,
        solver_energy,
        energy_difference: (solver_energy - oracle.energy).abs(),
        max_field_difference,
        pattern: oracle.pattern,
        feasible_patterns: oracle.feasible_patterns,
        runner_up_gap: oracle.runner_up_gap,
        oracle_field: Some(oracle.field),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn check(&mut self, module: &str, name: &str, f: impl FnOnce() -> Result<(bool, String), String>) {
        let (passed, detail) = f().unwrap_or_else(|e| (false, e));
        self.checks.push(Check { module: module.into(), name: name.into(), passed, detail });
    }
}

fn grid(nodes: &[usize]) -> Result<Arc<HalfGrid>, String> {
    HalfGrid::new(nodes.len(), nodes).map(Arc::new).map_err(|e| e.to_string())
}

fn models() -> Vec<NonlinearityModel> {
    vec![
        NonlinearityModel::quadratic(),
        NonlinearityModel::minimal_surface(),
        NonlinearityModel::perturbed_quadratic(0.1).expect("valid coefficient"),
    ]
}

/// Invariant checks across all modules, with `seed` driving the random
/// probes and fields.
pub fn run_suite(seed: u64) -> SuiteReport {
    let mut s = Suite { checks: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let err = |e: &dyn std::fmt::Display| e.to_string();

    for model in models() {
        for dim in [2, 3] {
            s.check("nonlinearity", &format!("structure/{}/{dim}d", model.name()), || {
                let r = verify_structure(&model, dim, 1.0, 128, seed).map_err(|e| err(&e))?;
                Ok((r.passed(), format!("lambda_min {:.6e}, violations {:?}", r.lambda_min, r.violations)))
            });
        }
    }
    s.check("nonlinearity", "minimal_surface/floor_at_1", || {
        let v = NonlinearityModel::minimal_surface().ellipticity_floor(1.0);
        Ok(((v - 2f64.powf(-1.5)).abs() <= 1e-6, format!("{v:.12}")))
    });

    s.check("geometry", "node_classes/5x3", || {
        let g = grid(&[5, 3])?;
        let counts = [NodeClass::Thin, NodeClass::Interior, NodeClass::Dirichlet].map(|c| g.nodes_of(c).len());
        Ok((counts == [3, 3, 9], format!("thin/interior/dirichlet = {counts:?}")))
    });
    let values: Vec<f64> = (0..9 * 5 * 3).map(|_| rng.random_range(-1e3..1e3)).collect();
    s.check("geometry", "thob_round_trip", || {
        let mut ok = true;
        for nodes in [&[9usize, 5][..], &[9, 5, 3][..]] {
            let g = grid(nodes)?;
            let f = ScalarField::new(g.clone(), values[..g.node_count()].to_vec()).map_err(|e| err(&e))?;
            let mut bytes = Vec::new();
            write_field(&mut bytes, &f).map_err(|e| err(&e))?;
            let back = read_field(bytes.as_slice()).map_err(|e| err(&e))?;
            ok &= back.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        }
        Ok((ok, "2D and 3D fields".into()))
    });
    s.check("geometry", "hemisphere_volume", || {
        let mut worst: f64 = 0.0;
        for (dim, exact) in [(2, std::f64::consts::PI / 2.0), (3, 2.0 * std::f64::consts::PI / 3.0)] {
            let rule = HemisphereRule::default_for(dim).map_err(|e| err(&e))?;
            let v = rule.at(&[0.0; 3], 1.0).map_err(|e| err(&e))?.volume_integral(|_| Ok::<_, String>(1.0))?;
            worst = worst.max((v - exact).abs());
        }
        Ok((worst <= 1e-12, format!("max error {worst:.3e}")))
    });

    let noise: Vec<f64> = (0..17 * 9).map(|_| rng.random_range(-0.5..0.5)).collect();
    for model in models() {
        s.check("solver", &format!("residual_vs_differences/{}", model.name()), || {
            let g = grid(&[17, 9])?;
            let u = ScalarField::new(g.clone(), noise.clone()).map_err(|e| err(&e))?;
            let r = discrete_residual(&u, &model);
            let step = 1e-6;
            let mut worst: f64 = 0.0;
            for i in (0..g.node_count()).filter(|&i| g.class(i) != NodeClass::Dirichlet).step_by(7) {
                let mut plus = u.clone();
                plus.values_mut()[i] += step;
                let mut minus = u.clone();
                minus.values_mut()[i] -= step;
                let fd = (discrete_energy(&plus, &model) - discrete_energy(&minus, &model)) / (2.0 * step);
                worst = worst.max((fd - r[i]).abs() / r[i].abs().max(1e-3));
            }
            Ok((worst <= 1e-6, format!("max relative error {worst:.3e}")))
        });
    }
    for model in models() {
        s.check("solver", &format!("kkt_certificate/{}", model.name()), || {
            let g = grid(&[33, 17])?;
            let data = BoundaryData::oracle(ExactSignoriniSolution::planar(0.1).map_err(|e| err(&e))?);
            let (_, r) = solve_signorini(&g, &model, &data, &SolveConfig::default()).map_err(|e| err(&e))?;
            let sign_ok = r
                .thin_nodes
                .iter()
                .zip(&r.sigma_n)
                .filter(|(i, _)| r.active_set.contains(i))
                .all(|(_, &s)| s >= -r.tol_kkt);
            Ok((r.kkt.within(r.tol_kkt) && sign_ok, format!("kkt max {:.3e} (tol {:.0e})", r.kkt.max(), r.tol_kkt)))
        });
    }

    s.check("oracles", "brute_force_vs_solver/5x3", || {
        let data = BoundaryData::oracle(ExactSignoriniSolution::planar(1.0).map_err(|e| err(&e))?);
        let c = oracle_comparison(&[5, 3], &NonlinearityModel::quadratic(), &data, &SolveConfig::default())
            .map_err(|e| err(&e))?;
        Ok((
            c.energy_difference <= 1e-8 && c.max_field_difference <= 1e-8,
            format!("energy diff {:.3e}, field diff {:.3e}", c.energy_difference, c.max_field_difference),
        ))
    });
    s.check("oracles", "exact_solution_is_discretely_harmonic", || {
        let sol = ExactSignoriniSolution::planar(1.0).map_err(|e| err(&e))?;
        // consistency error of the stencil away from the singular point, per unit volume
        let mut res = Vec::new();
        for n in [16, 32, 64] {
            let g = grid(&[2 * n + 1, n + 1])?;
            let u = ScalarField::from_fn(g.clone(), |x| sol.value(x));
            let r = discrete_residual(&u, &NonlinearityModel::quadratic());
            let vol = g.lattice().cell_volume();
            let worst = (0..g.node_count())
                .filter(|&i| g.class(i) == NodeClass::Interior)
                .filter(|&i| g.coords(i)[..2].iter().map(|v| v * v).sum::<f64>().sqrt() > 0.25)
                .map(|i| r[i].abs() / vol)
                .fold(0.0, f64::max);
            res.push(worst);
        }
        let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        Ok((orders.iter().all(|&o| o >= 1.5), format!("observed orders {orders:.3?}")))
    });
    s.check("analysis", "frequency_of_exact_profile", || {
        let sol = ExactSignoriniSolution::planar(1.0).map_err(|e| err(&e))?;
        let f = AnalyticField::new(2, |x: &[f64]| sol.value(x), |x: &[f64]| sol.gradient(x));
        let rule = HemisphereRule::default_for(2).map_err(|e| err(&e))?;
        let radii = radius_ladder(0.05, 0.4).map_err(|e| err(&e))?;
        let p = frequency_profile(&f, &NonlinearityModel::quadratic(), &rule, &[0.0; 3], &radii).map_err(|e| err(&e))?;
        let worst = p.rows.iter().map(|r| (r.n - 1.5).abs()).fold(0.0, f64::max);
        let m = monotonicity_fit(&p, 0.5, 1e-3, DEFAULT_C_MAX).map_err(|e| err(&e))?;
        Ok((
            worst <= 1e-6 && m.status == MonotonicityStatus::Monotone && m.fitted_c == Some(0.0),
            format!("max |N - 3/2| {worst:.3e}, fitted C {:?}", m.fitted_c),
        ))
    });
    s.check("analysis", "contact_set_of_exact_profile", || {
        let g = grid(&[33, 17])?;
        let sol = ExactSignoriniSolution::planar(1.0).map_err(|e| err(&e))?;
        let u = ScalarField::from_fn(g.clone(), |x| sol.value(x));
        let fb = extract_contact_set(&u, 1e-9).map_err(|e| err(&e))?;
        let expected = g.nodes_of(NodeClass::Thin).into_iter().filter(|&i| g.coords(i)[0] <= 0.0).count();
        let c = fb.refined_center_near(&[0.0; 3]).ok_or("no free boundary")?;
        Ok((fb.contact_nodes.len() == expected && c[0].abs() < 1e-12, format!("center {:?}", &c[..2])))
    });
    for parity in [Parity::Even, Parity::Odd] {
        s.check("analysis", &format!("symmetrization/{parity:?}"), || {
            let sol = ExactSignoriniSolution::planar(1.0).map_err(|e| err(&e))?;
            let c = if parity == Parity::Odd { -0.6 } else { 0.6 };
            let mut res = Vec::new();
            for n in [16, 32, 64] {
                let u = ScalarField::from_fn(grid(&[2 * n + 1, n + 1])?, |x| sol.value(x));
                let r = symmetrize_and_check(&u, &NonlinearityModel::quadratic(), &[c, 0.0, 0.0], 0.25, parity, 1e-12)
                    .map_err(|e| err(&e))?;
                res.push(r.max_residual);
            }
            let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
            Ok((orders.iter().all(|&o| o >= 1.0), format!("observed orders {orders:.3?}")))
        });
    }

    s.check("experiment", "config_digest", || {
        let a: serde_json::Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).map_err(|e| err(&e))?;
        let b: serde_json::Value = serde_json::from_str("{\"a\":[1,2],\n\"b\":1}").map_err(|e| err(&e))?;
        let c: serde_json::Value = serde_json::from_str(r#"{"a": [2, 1], "b": 1}"#).map_err(|e| err(&e))?;
        let (da, db, dc) = (digest_value(&a), digest_value(&b), digest_value(&c));
        Ok((da == db && da != dc, da))
    });

    SuiteReport { seed, checks: s.checks }
}
