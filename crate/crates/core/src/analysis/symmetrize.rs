use serde::{Deserialize, Serialize};

use crate::geometry::{Lattice, ScalarField};
use crate::nonlinearity::NonlinearityModel;
use crate::solver::EnergyOperator;

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Parity {
    /// `v(x', -x_n) = u(x', x_n)`; needs a contact-free trace.
    Even,
    /// `v(x', -x_n) = -u(x', x_n)`; needs the trace inside the contact set.
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationReport {
    pub parity: Parity,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Max of `|dE/dv_i| / |cell|` over lattice nodes inside the ball: the
    /// pointwise divergence residual.
    pub max_residual: f64,
    pub nodes_checked: usize,
}

/// Reflects `u` across the thin plane and evaluates the discrete
/// Euler-Lagrange residual of the reflected field inside the ball
/// `B_radius(center)`.
pub fn symmetrize_and_check(
    u: &ScalarField,
    model: &NonlinearityModel,
    center: &[f64],
    radius: f64,
    parity: Parity,
    epsilon_contact: f64,
) -> Result<SymmetrizationReport, AnalysisError> {
    let grid = u.grid();
    let dim = grid.dim();
    let nd = dim - 1;
    if center[nd] != 0.0 {
        return Err(AnalysisError::InvalidParameter("center must lie on the thin plane".into()));
    }
    if !(radius > 0.0) || radius > 1.0 || (0..nd).any(|a| center[a].abs() + radius > 1.0) {
        return Err(AnalysisError::InvalidParameter(format!("ball of radius {radius} leaves the box")));
    }
    let dist = |x: &[f64]| (0..dim).map(|a| (x[a] - center[a]).powi(2)).sum::<f64>().sqrt();

    let offending: Vec<usize> = grid
        .face_nodes()
        .into_iter()
        .filter(|&i| dist(&grid.coords(i)) < radius)
        .filter(|&i| {
            let v = u.values()[i];
            match parity {
                Parity::Even => v <= epsilon_contact,
                Parity::Odd => v.abs() > epsilon_contact,
            }
        })
        .collect();
    if !offending.is_empty() {
        let reason = match parity {
            Parity::Even => "even reflection needs a contact-free trace",
            Parity::Odd => "odd reflection needs the trace inside the contact set",
        };
        return Err(AnalysisError::Precondition { reason: reason.into(), nodes: offending });
    }

    let half = grid.nodes_per_axis();
    let mid = half[nd] - 1;
    let mut full_nodes = half.to_vec();
    full_nodes[nd] = 2 * mid + 1;
    let mut origin = grid.lattice().origin().to_vec();
    origin[nd] = -1.0;
    let full = Lattice::new(&full_nodes, grid.spacing(), &origin)?;
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let v: Vec<f64> = (0..full.node_count())
        .map(|i| {
            let mut m = full.multi_index(i);
            let below = m[nd] < mid;
            m[nd] = m[nd].abs_diff(mid);
            let val = u.values()[grid.lattice().index(&m[..dim])];
            if below {
                sign * val
            } else {
                val
            }
        })
        .collect();

    let op = EnergyOperator::new(&full, *model);
    let r = op.gradient(&v);
    let vol = full.cell_volume();
    let mut max_residual: f64 = 0.0;
    let mut nodes_checked = 0;
    for (i, ri) in r.iter().enumerate() {
        let m = full.multi_index(i);
        let on_boundary = (0..dim).any(|a| m[a] == 0 || m[a] + 1 == full_nodes[a]);
        if on_boundary || dist(&full.coords(i)) >= radius {
            continue;
        }
        nodes_checked += 1;
        max_residual = max_residual.max(ri.abs() / vol);
    }
    Ok(SymmetrizationReport { parity, center: center[..dim].to_vec(), radius, max_residual, nodes_checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HalfGrid;
    use crate::oracles::ExactSignoriniSolution;
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<HalfGrid> {
        Arc::new(HalfGrid::new(2, &[2 * n + 1, n + 1]).unwrap())
    }

    #[test]
    fn linear_fields_reflect_exactly() {
        let g = grid(16);
        let normal = ScalarField::from_fn(g.clone(), |x| x[1]);
        let odd = symmetrize_and_check(&normal, &NonlinearityModel::quadratic(), &[0.0; 3], 0.5, Parity::Odd, 1e-12).unwrap();
        assert!(odd.max_residual < 1e-12);
        assert!(odd.nodes_checked > 0);
        let tangential = ScalarField::from_fn(g.clone(), |x| x[0] + 2.0);
        for model in [NonlinearityModel::quadratic(), NonlinearityModel::minimal_surface()] {
            let even = symmetrize_and_check(&tangential, &model, &[0.0; 3], 0.5, Parity::Even, 1e-12).unwrap();
            assert!(even.max_residual < 1e-11);
        }
    }

    #[test]
    fn preconditions_list_offending_nodes() {
        let g = grid(8);
        let s = ExactSignoriniSolution::planar(1.0).unwrap();
        let u = ScalarField::from_fn(g.clone(), |x| s.value(x));
        let err = symmetrize_and_check(&u, &NonlinearityModel::quadratic(), &[0.0; 3], 0.3, Parity::Even, 1e-9).unwrap_err();
        match err {
            AnalysisError::Precondition { nodes, .. } => assert!(!nodes.is_empty()),
            e => panic!("{e}"),
        }
        assert!(symmetrize_and_check(&u, &NonlinearityModel::quadratic(), &[0.0; 3], 0.3, Parity::Odd, 1e-9).is_err());
    }

    #[test]
    fn oracle_reflections_converge() {
        let s = ExactSignoriniSolution::planar(1.0).unwrap();
        for (parity, c) in [(Parity::Odd, -0.6), (Parity::Even, 0.6)] {
            let res: Vec<f64> = [16, 32, 64]
                .iter()
                .map(|&n| {
                    let u = ScalarField::from_fn(grid(n), |x| s.value(x));
                    symmetrize_and_check(&u, &NonlinearityModel::quadratic(), &[c, 0.0, 0.0], 0.25, parity, 1e-12)
                        .unwrap()
                        .max_residual
                })
                .collect();
            for w in res.windows(2) {
                assert!((w[0] / w[1]).log2() >= 1.0, "{parity:?}: {res:?}");
            }
        }
    }
}
