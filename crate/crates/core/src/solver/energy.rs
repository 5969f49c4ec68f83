//! Cell-based discrete energy `E(u) = sum_cells |cell| avg_corners f(grad u)`.
//!
//! The gradient evaluated at a cell corner is the gradient of the
//! multilinear interpolant there, i.e. the one-sided edge differences
//! leaving that corner. For the quadratic density this reproduces the
//! standard `2n+1`-point Laplacian and has no hourglass null modes.

use crate::geometry::{pairwise_sum, Lattice};
use crate::nonlinearity::NonlinearityModel;

#[derive(Debug, Clone)]
pub struct EnergyOperator {
    lattice: Lattice,
    cells: Vec<[usize; 8]>,
    model: NonlinearityModel,
    corner_weight: f64,
    inv_h: [f64; 3],
}

/// Density of the Hessian at every cell corner, frozen at one iterate.
#[derive(Debug, Clone)]
pub struct Linearization {
    /// Per corner: `(a, b, p)` with `hessian = a I + b p p^T`.
    coeffs: Vec<(f64, f64, [f64; 3])>,
}

impl EnergyOperator {
    pub fn new(lattice: &Lattice, model: NonlinearityModel) -> Self {
        let dim = lattice.dim();
        let mut inv_h = [0.0; 3];
        for a in 0..dim {
            inv_h[a] = 1.0 / lattice.spacing()[a];
        }
        Self {
            lattice: lattice.clone(),
            cells: lattice.cell_corners(),
            model,
            corner_weight: lattice.cell_volume() / (1usize << dim) as f64,
            inv_h,
        }
    }

    pub fn model(&self) -> &NonlinearityModel {
        &self.model
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn corners(&self) -> usize {
        1 << self.lattice.dim()
    }

    #[inline]
    fn corner_gradient(&self, cell: &[usize; 8], b: usize, u: &[f64]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (a, ga) in g.iter_mut().enumerate().take(self.lattice.dim()) {
            let hi = cell[b | (1 << a)];
            let lo = cell[b & !(1 << a)];
            *ga = (u[hi] - u[lo]) * self.inv_h[a];
        }
        g
    }

    #[inline]
    fn scatter(&self, cell: &[usize; 8], b: usize, q: &[f64; 3], out: &mut [f64]) {
        for a in 0..self.lattice.dim() {
            let hi = cell[b | (1 << a)];
            let lo = cell[b & !(1 << a)];
            let v = self.corner_weight * q[a] * self.inv_h[a];
            out[hi] += v;
            out[lo] -= v;
        }
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        let per_cell: Vec<f64> = self
            .cells
            .iter()
            .map(|cell| {
                (0..self.corners())
                    .map(|b| {
                        let g = self.corner_gradient(cell, b, u);
                        self.model.h(norm3(&g))
                    })
                    .sum::<f64>()
            })
            .collect();
        self.corner_weight * pairwise_sum(&per_cell)
    }

    /// Exact gradient of [`Self::energy`] with respect to every node value.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for cell in &self.cells {
            for b in 0..self.corners() {
                let g = self.corner_gradient(cell, b, u);
                let s = self.model.h1_over_t(norm3(&g));
                let q = [s * g[0], s * g[1], s * g[2]];
                self.scatter(cell, b, &q, &mut out);
            }
        }
        out
    }

    /// Largest corner-gradient magnitude.
    pub fn max_gradient_norm(&self, u: &[f64]) -> f64 {
        self.cells
            .iter()
            .flat_map(|cell| (0..self.corners()).map(move |b| norm3(&self.corner_gradient(cell, b, u))))
            .fold(0.0, f64::max)
    }

    pub fn linearize(&self, u: &[f64]) -> Linearization {
        let mut coeffs = Vec::with_capacity(self.cells.len() * self.corners());
        for cell in &self.cells {
            for b in 0..self.corners() {
                let p = self.corner_gradient(cell, b, u);
                let (a, bb) = self.model.hessian_coefficients(norm3(&p));
                coeffs.push((a, bb, p));
            }
        }
        Linearization { coeffs }
    }

    /// Hessian of the energy applied to `v`, at the linearization point.
    pub fn hessian_apply(&self, lin: &Linearization, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let corners = self.corners();
        for (c, cell) in self.cells.iter().enumerate() {
            for b in 0..corners {
                let (a, bb, p) = &lin.coeffs[c * corners + b];
                let dg = self.corner_gradient(cell, b, v);
                let pd = p[0] * dg[0] + p[1] * dg[1] + p[2] * dg[2];
                let q = [a * dg[0] + bb * pd * p[0], a * dg[1] + bb * pd * p[1], a * dg[2] + bb * pd * p[2]];
                self.scatter(cell, b, &q, out);
            }
        }
    }

    pub fn hessian_diagonal(&self, lin: &Linearization, n: usize) -> Vec<f64> {
        let dim = self.lattice.dim();
        let corners = self.corners();
        let mut diag = vec![0.0; n];
        for (c, cell) in self.cells.iter().enumerate() {
            for b in 0..corners {
                let (a, bb, p) = &lin.coeffs[c * corners + b];
                // derivative of this corner's gradient with respect to the corner node
                let mut s = [0.0; 3];
                for (ax, sa) in s.iter_mut().enumerate().take(dim) {
                    *sa = if b & (1 << ax) != 0 { self.inv_h[ax] } else { -self.inv_h[ax] };
                }
                let ps = p[0] * s[0] + p[1] * s[1] + p[2] * s[2];
                let ss = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
                diag[cell[b]] += self.corner_weight * (a * ss + bb * ps * ps);
                for ax in 0..dim {
                    let other = cell[b ^ (1 << ax)];
                    let haa = a + bb * p[ax] * p[ax];
                    diag[other] += self.corner_weight * haa * self.inv_h[ax] * self.inv_h[ax];
                }
            }
        }
        diag
    }
}

#[inline]
pub(crate) fn norm3(g: &[f64; 3]) -> f64 {
    (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
}
