use serde::{Deserialize, Serialize};

use crate::geometry::{NodeClass, Point, ScalarField};

use super::AnalysisError;

/// A cell of the thin face, identified by its corner nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceCell {
    pub corners: Vec<usize>,
    pub centroid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundarySet {
    pub epsilon: f64,
    /// Thin nodes with `u <= epsilon`.
    pub contact_nodes: Vec<usize>,
    /// Face cells whose corners mix contact and non-contact nodes. Rim
    /// corners are classified by the same rule.
    pub free_boundary_cells: Vec<FaceCell>,
    /// Sub-cell free-boundary points on face edges joining a contact node to
    /// a non-contact node.
    pub edge_crossings: Vec<EdgeCrossing>,
}

/// Free-boundary point on a face edge, located by fitting
/// `u ~ (x - x*)^{3/2}` through the first two non-contact nodes beyond the
/// edge; the edge midpoint when no such fit is available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCrossing {
    pub contact_node: usize,
    pub free_node: usize,
    pub point: Vec<f64>,
}

impl FreeBoundarySet {
    /// Mixed-cell centroid nearest `target`, as a point on the thin plane.
    pub fn center_near(&self, target: &[f64]) -> Option<Point> {
        nearest(self.free_boundary_cells.iter().map(|c| c.centroid.as_slice()), target)
    }

    /// Edge crossing nearest `target`.
    pub fn refined_center_near(&self, target: &[f64]) -> Option<Point> {
        nearest(self.edge_crossings.iter().map(|c| c.point.as_slice()), target)
    }

    pub fn center(&self, rule: CenterRule, target: &[f64]) -> Option<Point> {
        match rule {
            CenterRule::CellCentroid => self.center_near(target),
            CenterRule::EdgeCrossing => self.refined_center_near(target),
        }
    }
}

/// How a free-boundary point is picked near a requested location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterRule {
    CellCentroid,
    EdgeCrossing,
}

fn nearest<'a>(points: impl Iterator<Item = &'a [f64]>, target: &[f64]) -> Option<Point> {
    let dist = |c: &[f64]| c.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    points.min_by(|a, b| dist(a).total_cmp(&dist(b))).map(|c| {
        let mut p = [0.0; 3];
        p[..c.len()].copy_from_slice(c);
        p
    })
}

pub fn extract_contact_set(u: &ScalarField, epsilon: f64) -> Result<FreeBoundarySet, AnalysisError> {
    if !(epsilon > 0.0) {
        return Err(AnalysisError::InvalidParameter(format!("epsilon_contact = {epsilon}")));
    }
    let grid = u.grid();
    let lattice = grid.lattice();
    let dim = grid.dim();
    let n = grid.nodes_per_axis();
    let touching = |i: usize| u.values()[i] <= epsilon;
    let contact_nodes = grid.nodes_of(NodeClass::Thin).into_iter().filter(|&i| touching(i)).collect();

    let mut free_boundary_cells = Vec::new();
    let face_axes = dim - 1;
    let cells_per_axis: Vec<usize> = n[..face_axes].iter().map(|k| k - 1).collect();
    let cell_count: usize = cells_per_axis.iter().product();
    for c in 0..cell_count {
        let mut lower = [0usize; 3];
        let mut rest = c;
        for a in (0..face_axes).rev() {
            lower[a] = rest % cells_per_axis[a];
            rest /= cells_per_axis[a];
        }
        let corners: Vec<usize> = (0..1usize << face_axes)
            .map(|b| {
                let mut m = lower;
                for (a, slot) in m.iter_mut().enumerate().take(face_axes) {
                    *slot += (b >> a) & 1;
                }
                lattice.index(&m[..dim])
            })
            .collect();
        let hits = corners.iter().filter(|&&i| touching(i)).count();
        if hits > 0 && hits < corners.len() {
            let mut centroid = vec![0.0; dim];
            for &i in &corners {
                let x = grid.coords(i);
                for a in 0..dim {
                    centroid[a] += x[a] / corners.len() as f64;
                }
            }
            free_boundary_cells.push(FaceCell { corners, centroid });
        }
    }
    let mut edge_crossings = Vec::new();
    for i in grid.face_nodes() {
        if !touching(i) {
            continue;
        }
        let m = lattice.multi_index(i);
        for a in 0..face_axes {
            let h = grid.spacing()[a];
            for step in [-1isize, 1] {
                let at = |k: isize| -> Option<usize> {
                    let j = m[a] as isize + k * step;
                    (j >= 0 && (j as usize) < n[a]).then(|| {
                        let mut mm = m;
                        mm[a] = j as usize;
                        lattice.index(&mm[..dim])
                    })
                };
                let Some(f1) = at(1) else { continue };
                if touching(f1) {
                    continue;
                }
                // distance from the crossing to the first free node
                let mut d = 0.5 * h;
                if let Some(f2) = at(2).filter(|&f2| !touching(f2)) {
                    let q = (u.values()[f2] / u.values()[f1]).powf(2.0 / 3.0);
                    if q > 1.0 {
                        d = (h / (q - 1.0)).min(h);
                    }
                }
                let mut point = grid.coords(f1)[..dim].to_vec();
                point[a] -= step as f64 * d;
                edge_crossings.push(EdgeCrossing { contact_node: i, free_node: f1, point });
            }
        }
    }
    Ok(FreeBoundarySet { epsilon, contact_nodes, free_boundary_cells, edge_crossings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HalfGrid;
    use crate::oracles::ExactSignoriniSolution;
    use std::sync::Arc;

    #[test]
    fn oracle_contact_is_left_half() {
        for dims in [&[33usize, 17][..], &[9, 9, 5][..]] {
            let g = Arc::new(HalfGrid::new(dims.len(), dims).unwrap());
            let s = ExactSignoriniSolution::new(1.0, dims.len(), 1).unwrap();
            let u = ScalarField::from_fn(g.clone(), |x| s.value(x));
            let fb = extract_contact_set(&u, 1e-7).unwrap();
            let axis = s.profile_axis();
            let expected: Vec<usize> =
                g.nodes_of(NodeClass::Thin).into_iter().filter(|&i| g.coords(i)[axis] <= 1e-7).collect();
            assert_eq!(fb.contact_nodes, expected);
            let c = fb.center_near(&[0.0; 3]).unwrap();
            let h = g.spacing()[axis];
            assert!((c[axis] - 0.5 * h).abs() < 1e-12, "{c:?}");
            assert!(fb.free_boundary_cells.iter().all(|cell| (cell.centroid[axis] - 0.5 * h).abs() < 1e-12));
            // the 3/2 law puts the crossing exactly on the true free boundary
            let r = fb.refined_center_near(&[0.0; 3]).unwrap();
            assert!(r[axis].abs() < 1e-12, "{r:?}");
            assert!(fb.edge_crossings.iter().all(|c| c.point[axis].abs() < 1e-12));
        }
    }

    #[test]
    fn constant_traces() {
        let g = Arc::new(HalfGrid::new(2, &[17, 9]).unwrap());
        let one = extract_contact_set(&ScalarField::from_fn(g.clone(), |_| 1.0), 1e-8).unwrap();
        assert!(one.contact_nodes.is_empty() && one.free_boundary_cells.is_empty() && one.edge_crossings.is_empty());
        let zero = extract_contact_set(&ScalarField::zeros(g.clone()), 1e-8).unwrap();
        assert_eq!(zero.contact_nodes.len(), 15);
        assert!(zero.free_boundary_cells.is_empty() && zero.edge_crossings.is_empty());
        assert!(zero.center_near(&[0.0; 3]).is_none());
    }
}
