use serde::{Deserialize, Serialize};

use super::{GeometryError, Point};

/// Axis-aligned uniform node lattice. The last axis is the normal `x_n`
/// direction and varies fastest in the node numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    nodes: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    strides: [usize; 3],
    count: usize,
}

impl Lattice {
    pub fn new(nodes: &[usize], spacing: &[f64], origin: &[f64]) -> Result<Self, GeometryError> {
        let dim = nodes.len();
        if !(2..=3).contains(&dim) || spacing.len() != dim || origin.len() != dim {
            return Err(GeometryError::UnsupportedDim(dim));
        }
        let mut n = [1usize; 3];
        let mut h = [1.0; 3];
        let mut o = [0.0; 3];
        for a in 0..dim {
            if nodes[a] < 2 {
                return Err(GeometryError::TooFewNodes { axis: a, nodes: nodes[a], min: 2 });
            }
            n[a] = nodes[a];
            h[a] = spacing[a];
            o[a] = origin[a];
        }
        let mut strides = [0usize; 3];
        let mut s = 1;
        for a in (0..dim).rev() {
            strides[a] = s;
            s *= n[a];
        }
        Ok(Self { dim, nodes: n, spacing: h, origin: o, strides, count: s })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.count
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        (0..self.dim).map(|a| multi[a] * self.strides[a]).sum()
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut m = [0usize; 3];
        for a in 0..self.dim {
            m[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
        m
    }

    pub fn coords(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.origin[a] + m[a] as f64 * self.spacing[a];
        }
        x
    }

    pub fn upper_corner(&self, axis: usize) -> f64 {
        self.origin[axis] + (self.nodes[axis] - 1) as f64 * self.spacing[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }

    pub fn cell_count(&self) -> usize {
        (0..self.dim).map(|a| self.nodes[a] - 1).product()
    }

    /// Node indices of every cell's `2^dim` corners; corner `b` has bit `a`
    /// set when it sits on the upper side along axis `a`.
    pub fn cell_corners(&self) -> Vec<[usize; 8]> {
        let corners = 1usize << self.dim;
        let mut out = Vec::with_capacity(self.cell_count());
        let cells = [
            self.nodes[0] - 1,
            self.nodes[1] - 1,
            if self.dim == 3 { self.nodes[2] - 1 } else { 1 },
        ];
        for i in 0..cells[0] {
            for j in 0..cells[1] {
                for k in 0..cells[2] {
                    let base = self.index(&[i, j, k]);
                    let mut c = [0usize; 8];
                    for (b, slot) in c.iter_mut().enumerate().take(corners) {
                        let mut idx = base;
                        for a in 0..self.dim {
                            if b & (1 << a) != 0 {
                                idx += self.strides[a];
                            }
                        }
                        *slot = idx;
                    }
                    out.push(c);
                }
            }
        }
        out
    }

    /// Whether `x` lies in the closed lattice box (with a roundoff allowance).
    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|a| {
            let tol = 1e-12 * (1.0 + self.upper_corner(a).abs());
            x[a] >= self.origin[a] - tol && x[a] <= self.upper_corner(a) + tol
        })
    }

    /// Cell containing `x` and the local coordinates in `[0, 1]^dim`.
    pub fn locate(&self, x: &[f64]) -> Result<([usize; 3], [f64; 3]), GeometryError> {
        if !self.contains(x) {
            return Err(GeometryError::OutOfExtent(x[..self.dim].to_vec()));
        }
        let mut cell = [0usize; 3];
        let mut local = [0.0; 3];
        for a in 0..self.dim {
            let s = (x[a] - self.origin[a]) / self.spacing[a];
            let i = (s.floor().max(0.0) as usize).min(self.nodes[a] - 2);
            cell[a] = i;
            local[a] = (s - i as f64).clamp(0.0, 1.0);
        }
        Ok((cell, local))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeClass {
    Interior,
    /// On `x_n = 0`, off the outer rim: carries the constraint `u >= 0`.
    Thin,
    Dirichlet,
}

/// Lattice on the half-box `[-1, 1]^{n-1} x [0, 1]` with the origin at the
/// center of the thin face.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfGrid {
    lattice: Lattice,
    class: Vec<NodeClass>,
}

impl HalfGrid {
    /// Builds the classified grid. Tangential axes need an odd count of at
    /// least 5 nodes; the normal axis needs an odd count of at least 3.
    pub fn new(dim: usize, nodes_per_axis: &[usize]) -> Result<Self, GeometryError> {
        if !(2..=3).contains(&dim) {
            return Err(GeometryError::UnsupportedDim(dim));
        }
        if nodes_per_axis.len() != dim {
            return Err(GeometryError::AxisCount { dim, given: nodes_per_axis.len() });
        }
        for (axis, &n) in nodes_per_axis.iter().enumerate() {
            if n % 2 == 0 {
                return Err(GeometryError::EvenNodeCount { axis, nodes: n });
            }
            let min = if axis + 1 == dim { 3 } else { 5 };
            if n < min {
                return Err(GeometryError::TooFewNodes { axis, nodes: n, min });
            }
        }
        let spacing: Vec<f64> = (0..dim)
            .map(|a| {
                let extent = if a + 1 == dim { 1.0 } else { 2.0 };
                extent / (nodes_per_axis[a] - 1) as f64
            })
            .collect();
        let origin: Vec<f64> = (0..dim).map(|a| if a + 1 == dim { 0.0 } else { -1.0 }).collect();
        let lattice = Lattice::new(nodes_per_axis, &spacing, &origin)?;
        let class = (0..lattice.node_count())
            .map(|i| {
                let m = lattice.multi_index(i);
                let rim = (0..dim - 1).any(|a| m[a] == 0 || m[a] + 1 == nodes_per_axis[a]);
                let top = m[dim - 1] + 1 == nodes_per_axis[dim - 1];
                let bottom = m[dim - 1] == 0;
                if rim || top {
                    NodeClass::Dirichlet
                } else if bottom {
                    NodeClass::Thin
                } else {
                    NodeClass::Interior
                }
            })
            .collect();
        Ok(Self { lattice, class })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim
    }

    pub fn node_count(&self) -> usize {
        self.lattice.count
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        self.lattice.nodes_per_axis()
    }

    pub fn spacing(&self) -> &[f64] {
        self.lattice.spacing()
    }

    /// Largest spacing over the axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing().iter().copied().fold(0.0, f64::max)
    }

    pub fn coords(&self, idx: usize) -> Point {
        self.lattice.coords(idx)
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    pub fn nodes_of(&self, class: NodeClass) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.class[i] == class).collect()
    }

    /// All nodes on `x_n = 0`, rim included, in numbering order.
    pub fn face_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&i| self.lattice.multi_index(i)[self.dim() - 1] == 0)
            .collect()
    }

    /// `(n-1)`-dimensional measure attached to a thin node.
    pub fn thin_weight(&self) -> f64 {
        self.spacing()[..self.dim() - 1].iter().product()
    }

    /// Node index at the origin (center of the thin face).
    pub fn origin_node(&self) -> usize {
        let n = self.nodes_per_axis();
        let mut m = [0usize; 3];
        for a in 0..self.dim() - 1 {
            m[a] = (n[a] - 1) / 2;
        }
        self.lattice.index(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(g: &HalfGrid, c: NodeClass) -> usize {
        g.classes().iter().filter(|&&k| k == c).count()
    }

    #[test]
    fn five_by_three_classification() {
        // bottom row: 2 rim + 3 thin; middle row: 2 rim + 3 interior; top row 5.
        let g = HalfGrid::new(2, &[5, 3]).unwrap();
        assert_eq!(g.node_count(), 15);
        assert_eq!(count(&g, NodeClass::Thin), 3);
        assert_eq!(count(&g, NodeClass::Interior), 3);
        assert_eq!(count(&g, NodeClass::Dirichlet), 9);
        assert_eq!(g.spacing(), &[0.5, 0.5]);
        assert_eq!(g.coords(g.origin_node()), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn nine_nine_five() {
        let g = HalfGrid::new(3, &[9, 9, 5]).unwrap();
        assert_eq!(g.node_count(), 405);
        assert_eq!(count(&g, NodeClass::Thin), 49);
        assert_eq!(count(&g, NodeClass::Interior), 7 * 7 * 3);
        let [x, y, z] = g.coords(g.origin_node());
        assert_eq!((x, y, z), (0.0, 0.0, 0.0));
        for i in 0..g.node_count() {
            let x = g.coords(i);
            if g.class(i) == NodeClass::Thin {
                assert_eq!(x[2], 0.0);
                assert!(x[0].abs() < 1.0 && x[1].abs() < 1.0);
            }
        }
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(matches!(HalfGrid::new(2, &[4, 3]), Err(GeometryError::EvenNodeCount { axis: 0, nodes: 4 })));
        assert!(matches!(HalfGrid::new(2, &[3, 3]), Err(GeometryError::TooFewNodes { .. })));
        assert!(matches!(HalfGrid::new(4, &[5, 5, 5, 5]), Err(GeometryError::UnsupportedDim(4))));
        assert!(matches!(HalfGrid::new(2, &[5]), Err(GeometryError::AxisCount { .. })));
    }

    #[test]
    fn spacing_times_intervals_is_extent() {
        let g = HalfGrid::new(3, &[17, 9, 7]).unwrap();
        assert_eq!(g.spacing()[0] * 16.0, 2.0);
        assert_eq!(g.spacing()[1] * 8.0, 2.0);
        assert_eq!(g.spacing()[2] * 6.0, 1.0);
    }

    #[test]
    fn cell_corners_follow_bit_convention() {
        let g = HalfGrid::new(2, &[5, 3]).unwrap();
        let cells = g.lattice().cell_corners();
        assert_eq!(cells.len(), 8);
        let c = cells[0];
        assert_eq!(g.coords(c[0])[..2], [-1.0, 0.0]);
        assert_eq!(g.coords(c[1])[..2], [-0.5, 0.0]);
        assert_eq!(g.coords(c[2])[..2], [-1.0, 0.5]);
        assert_eq!(g.coords(c[3])[..2], [-0.5, 0.5]);
    }
}
