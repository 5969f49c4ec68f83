use std::sync::Arc;

use proptest::prelude::*;
use thinobs::analysis::compute_n;
use thinobs::experiment::RunConfig;
use thinobs::geometry::{AnalyticField, HalfGrid, HemisphereRule, NodeClass, ScalarField};
use thinobs::nonlinearity::NonlinearityModel;
use thinobs::oracles::ExactSignoriniSolution;
use thinobs::solver::{discrete_energy, discrete_residual, solve_signorini, BoundaryData, SolveConfig};

fn grid() -> Arc<HalfGrid> {
    Arc::new(HalfGrid::new(2, &[9, 5]).unwrap())
}

fn model(k: usize) -> NonlinearityModel {
    match k {
        0 => NonlinearityModel::quadratic(),
        1 => NonlinearityModel::minimal_surface(),
        _ => NonlinearityModel::perturbed_quadratic(0.1).unwrap(),
    }
}

fn field(values: Vec<f64>) -> ScalarField {
    ScalarField::new(grid(), values).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 45)
}

proptest! {
    #[test]
    fn energy_is_convex_along_segments(a in values(), b in values(), t in 0.0..1.0f64, k in 0..3usize) {
        let m = model(k);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
        let lhs = discrete_energy(&field(mix), &m);
        let rhs = (1.0 - t) * discrete_energy(&field(a), &m) + t * discrete_energy(&field(b), &m);
        prop_assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0), "{lhs} > {rhs}");
    }

    #[test]
    fn quadratic_energy_scales_by_the_square(a in values(), c in -3.0..3.0f64) {
        let m = NonlinearityModel::quadratic();
        let u = field(a.clone());
        let e = discrete_energy(&u, &m);
        let scaled = discrete_energy(&u.scaled(c), &m);
        prop_assert!((scaled - c * c * e).abs() <= 1e-10 * e.max(1.0));
        let r = discrete_residual(&u, &m);
        let rs = discrete_residual(&u.scaled(c), &m);
        for (x, y) in r.iter().zip(&rs) {
            prop_assert!((y - c * x).abs() <= 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn constants_are_critical(c in -5.0..5.0f64, k in 0..3usize) {
        let u = ScalarField::from_fn(grid(), |_| c);
        let r = discrete_residual(&u, &model(k));
        prop_assert!(r.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn frequency_ignores_amplitude(a in 0.05..5.0f64, rho in 0.05..0.9f64) {
        let sol = ExactSignoriniSolution::planar(a).unwrap();
        let u = AnalyticField::new(2, |x: &[f64]| sol.value(x), |x: &[f64]| sol.gradient(x));
        let rule = HemisphereRule::default_for(2).unwrap();
        let n = compute_n(&u, &NonlinearityModel::quadratic(), &rule, &[0.0; 3], rho).unwrap();
        prop_assert!((n - 1.5).abs() <= 1e-9, "{n}");
    }

    #[test]
    fn digest_tracks_content_not_layout(seed in any::<u64>(), nx in 2usize..20) {
        let nodes = format!("[{}, {}]", 2 * nx + 1, nx + 1);
        let a = format!(r#"{{"dim": 2, "nodes_per_axis": {nodes}, "nonlinearity": {{"name": "quadratic"}},
            "boundary": {{"generator": "constant", "value": 1.0}}, "seed": {seed}}}"#);
        let b = format!(r#"{{"seed":{seed},"boundary":{{"value":1.0,"generator":"constant"}},
            "nonlinearity":{{"name":"quadratic"}},"nodes_per_axis":{nodes},"dim":2,"output":"elsewhere"}}"#);
        let da = RunConfig::from_json(&a).unwrap().digest();
        prop_assert_eq!(&da, &RunConfig::from_json(&b).unwrap().digest());
        let c = a.replace(&format!("\"seed\": {seed}"), &format!("\"seed\": {}", seed.wrapping_add(1)));
        prop_assert_ne!(da, RunConfig::from_json(&c).unwrap().digest());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_are_ordered_like_their_data(lo in 0.0..0.5f64, gap in 0.0..0.5f64, k in 0..3usize) {
        let g = grid();
        let m = model(k);
        let data = |offset: f64| BoundaryData::table(ScalarField::from_fn(g.clone(), |x| {
            (x[0] - 0.2).powi(2) - 0.3 + x[1] + offset
        }));
        let cfg = SolveConfig::default();
        let (u1, r1) = solve_signorini(&g, &m, &data(lo), &cfg).unwrap();
        let (u2, _) = solve_signorini(&g, &m, &data(lo + gap), &cfg).unwrap();
        for i in 0..g.node_count() {
            prop_assert!(u1.values()[i] <= u2.values()[i] + 10.0 * r1.tol_kkt, "node {i}");
        }
        for i in g.nodes_of(NodeClass::Thin) {
            prop_assert!(u1.values()[i] >= 0.0);
        }
    }
}
