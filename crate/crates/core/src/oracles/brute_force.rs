use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::geometry::{HalfGrid, NodeClass, ScalarField};
use crate::nonlinearity::NonlinearityModel;
use crate::solver::{discrete_energy, discrete_residual, BoundaryData};

use super::OracleError;

pub const MAX_ENUMERATED_THIN: usize = 12;

const FEASIBILITY_TOL: f64 = 1e-12;
const REFERENCE_STEP: f64 = 1e-3;
const REFERENCE_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct BruteForceSolution {
    pub field: ScalarField,
    pub energy: f64,
    /// Thin nodes pinned to zero (empty for the nonlinear reference).
    pub pattern: Vec<usize>,
    /// Energy of the best other feasible pattern minus the optimum, when one
    /// exists.
    pub runner_up_gap: Option<f64>,
    pub feasible_patterns: usize,
}

/// Exhaustive contact-pattern solve for the quadratic model; a long fixed-step
/// projected-gradient run for other models.
pub fn brute_force_solve(
    grid: &Arc<HalfGrid>,
    model: &NonlinearityModel,
    g: &BoundaryData,
) -> Result<BruteForceSolution, OracleError> {
    let thin = grid.nodes_of(NodeClass::Thin);
    if thin.len() > MAX_ENUMERATED_THIN {
        return Err(OracleError::TooManyThinNodes { found: thin.len(), max: MAX_ENUMERATED_THIN });
    }
    g.validate(grid).map_err(|e| OracleError::Boundary(e.to_string()))?;
    let n = grid.node_count();
    let mut base = vec![0.0; n];
    for (i, b) in base.iter_mut().enumerate() {
        if grid.class(i) == NodeClass::Dirichlet {
            *b = g.eval(&grid.coords(i));
        }
    }
    if model.is_quadratic() {
        enumerate(grid, model, &thin, base)
    } else {
        Ok(reference_descent(grid, model, base))
    }
}

fn enumerate(
    grid: &Arc<HalfGrid>,
    model: &NonlinearityModel,
    thin: &[usize],
    base: Vec<f64>,
) -> Result<BruteForceSolution, OracleError> {
    let n = grid.node_count();
    let free: Vec<usize> = (0..n).filter(|&i| grid.class(i) != NodeClass::Dirichlet).collect();
    // the residual is linear in u for the quadratic model: probe its columns
    let probe = |v: Vec<f64>| discrete_residual(&ScalarField::new(grid.clone(), v).expect("finite probe"), model);
    let mut k = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        k.set_column(j, &DVector::from_vec(probe(e)));
    }
    let r_boundary = probe(base.clone());

    let candidates: Vec<(u32, Vec<f64>, f64)> = (0u32..1 << thin.len())
        .into_par_iter()
        .filter_map(|mask| {
            let pinned: Vec<usize> = (0..thin.len()).filter(|b| mask & (1 << b) != 0).map(|b| thin[b]).collect();
            let unknowns: Vec<usize> = free.iter().copied().filter(|i| !pinned.contains(i)).collect();
            let m = unknowns.len();
            let mut u = base.clone();
            if m > 0 {
                let a = DMatrix::from_fn(m, m, |r, c| k[(unknowns[r], unknowns[c])]);
                let rhs = DVector::from_fn(m, |r, _| -r_boundary[unknowns[r]]);
                let x = a.lu().solve(&rhs)?;
                for (r, &i) in unknowns.iter().enumerate() {
                    u[i] = x[r];
                }
            }
            let field = ScalarField::new(grid.clone(), u).ok()?;
            let res = discrete_residual(&field, model);
            let scale = res.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            for &i in thin {
                if pinned.contains(&i) {
                    if res[i] < -FEASIBILITY_TOL * scale {
                        return None;
                    }
                } else if field.values()[i] < -FEASIBILITY_TOL {
                    return None;
                }
            }
            let energy = discrete_energy(&field, model);
            Some((mask, field.into_values(), energy))
        })
        .collect();

    let feasible_patterns = candidates.len();
    let best = candidates
        .iter()
        .min_by(|a, b| a.2.total_cmp(&b.2).then_with(|| pattern_order(a.0, b.0)))
        .ok_or(OracleError::NoFeasiblePattern)?;
    let runner_up_gap = candidates.iter().filter(|c| c.0 != best.0).map(|c| c.2 - best.2).min_by(f64::total_cmp);
    let pattern = (0..thin.len()).filter(|b| best.0 & (1 << b) != 0).map(|b| thin[b]).collect();
    Ok(BruteForceSolution {
        field: ScalarField::new(grid.clone(), best.1.clone()).expect("finite candidate"),
        energy: best.2,
        pattern,
        runner_up_gap,
        feasible_patterns,
    })
}

/// Lexicographic order on the sorted node lists encoded by two masks.
fn pattern_order(a: u32, b: u32) -> std::cmp::Ordering {
    let bits = |m: u32| (0..32).filter(move |k| m & (1 << k) != 0);
    bits(a).cmp(bits(b))
}

fn reference_descent(grid: &Arc<HalfGrid>, model: &NonlinearityModel, base: Vec<f64>) -> BruteForceSolution {
    let n = grid.node_count();
    let mut u = base;
    for i in 0..n {
        if grid.class(i) != NodeClass::Dirichlet {
            u[i] = 0.0;
        }
    }
    let mut field = ScalarField::new(grid.clone(), u).expect("finite start");
    for _ in 0..REFERENCE_ITERATIONS {
        let r = discrete_residual(&field, model);
        let mut moved: f64 = 0.0;
        for (i, v) in field.values_mut().iter_mut().enumerate() {
            let next = match grid.class(i) {
                NodeClass::Interior => *v - REFERENCE_STEP * r[i],
                NodeClass::Thin => (*v - REFERENCE_STEP * r[i]).max(0.0),
                NodeClass::Dirichlet => continue,
            };
            moved = moved.max((next - *v).abs());
            *v = next;
        }
        if moved == 0.0 {
            break;
        }
    }
    let energy = discrete_energy(&field, model);
    BruteForceSolution { field, energy, pattern: Vec::new(), runner_up_gap: None, feasible_patterns: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::ExactSignoriniSolution;
    use crate::solver::{solve_signorini, SolveConfig};

    fn grid5x3() -> Arc<HalfGrid> {
        Arc::new(HalfGrid::new(2, &[5, 3]).unwrap())
    }

    #[test]
    fn constant_data() {
        for c in [0.0, 1.0] {
            let s = brute_force_solve(&grid5x3(), &NonlinearityModel::quadratic(), &BoundaryData::constant(c)).unwrap();
            assert!(s.field.values().iter().all(|v| (v - c).abs() < 1e-12));
            assert!(s.pattern.is_empty() || c == 0.0);
            if c == 0.0 {
                assert!(s.energy.abs() < 1e-24);
            }
        }
    }

    #[test]
    fn oracle_trace_pins_left_half() {
        let g = grid5x3();
        let data = BoundaryData::oracle(ExactSignoriniSolution::planar(1.0).unwrap());
        let s = brute_force_solve(&g, &NonlinearityModel::quadratic(), &data).unwrap();
        // the discrete solution also touches down at the origin node
        let left: Vec<usize> = g.nodes_of(NodeClass::Thin).into_iter().filter(|&i| g.coords(i)[0] <= 0.0).collect();
        assert_eq!(s.pattern, left);
        assert_eq!(s.feasible_patterns, 1);
        let (u, _) = solve_signorini(&g, &NonlinearityModel::quadratic(), &data, &SolveConfig::default()).unwrap();
        for (a, b) in u.values().iter().zip(s.field.values()) {
            assert!((a - b).abs() <= 1e-8);
        }
        assert!((discrete_energy(&u, &NonlinearityModel::quadratic()) - s.energy).abs() <= 1e-8);
    }

    #[test]
    fn rejects_large_grids() {
        let g = Arc::new(HalfGrid::new(2, &[17, 5]).unwrap());
        let r = brute_force_solve(&g, &NonlinearityModel::quadratic(), &BoundaryData::constant(1.0));
        assert!(matches!(r, Err(OracleError::TooManyThinNodes { found: 15, .. })));
    }

    #[test]
    fn pattern_order_is_lexicographic() {
        use std::cmp::Ordering::*;
        assert_eq!(pattern_order(0b01, 0b10), Less);
        assert_eq!(pattern_order(0b011, 0b001), Greater);
        assert_eq!(pattern_order(0, 0b1), Less);
    }
}
