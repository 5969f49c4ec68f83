use std::sync::Arc;

use super::{GeometryError, HalfGrid, Lattice, Point};

/// One value per node of a [`HalfGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<HalfGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<HalfGrid>, values: Vec<f64>) -> Result<Self, GeometryError> {
        if values.len() != grid.node_count() {
            return Err(GeometryError::ValueCount { expected: grid.node_count(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteValue(i));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<HalfGrid>, f: impl Fn(&Point) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|i| f(&grid.coords(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<HalfGrid>) -> Self {
        let n = grid.node_count();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<HalfGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn interpolate(&self, x: &[f64]) -> Result<f64, GeometryError> {
        multilinear(self.grid.lattice(), &self.values, 1, 0, x)
    }

    /// Node gradients: central differences inside, one-sided at faces.
    pub fn node_gradient(&self) -> VectorField {
        VectorField { grid: self.grid.clone(), values: node_gradient(self.grid.lattice(), &self.values) }
    }
}

/// `dim` values per node, interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Arc<HalfGrid>,
    values: Vec<f64>,
}

impl VectorField {
    pub fn grid(&self) -> &Arc<HalfGrid> {
        &self.grid
    }

    pub fn at_node(&self, idx: usize) -> &[f64] {
        let d = self.grid.dim();
        &self.values[idx * d..(idx + 1) * d]
    }

    pub fn interpolate(&self, x: &[f64]) -> Result<Point, GeometryError> {
        let d = self.grid.dim();
        let mut out = [0.0; 3];
        for (c, slot) in out.iter_mut().enumerate().take(d) {
            *slot = multilinear(self.grid.lattice(), &self.values, d, c, x)?;
        }
        Ok(out)
    }
}

pub(crate) fn node_gradient(lattice: &Lattice, values: &[f64]) -> Vec<f64> {
    let d = lattice.dim();
    let mut out = vec![0.0; values.len() * d];
    for i in 0..values.len() {
        let m = lattice.multi_index(i);
        for a in 0..d {
            let n = lattice.nodes_per_axis()[a];
            let s = lattice.stride(a);
            let h = lattice.spacing()[a];
            out[i * d + a] = if m[a] == 0 {
                (values[i + s] - values[i]) / h
            } else if m[a] + 1 == n {
                (values[i] - values[i - s]) / h
            } else {
                (values[i + s] - values[i - s]) / (2.0 * h)
            };
        }
    }
    out
}

/// Multilinear interpolation of component `comp` of a field stored with
/// `stride` values per node.
pub(crate) fn multilinear(
    lattice: &Lattice,
    values: &[f64],
    stride: usize,
    comp: usize,
    x: &[f64],
) -> Result<f64, GeometryError> {
    let (cell, local) = lattice.locate(x)?;
    let d = lattice.dim();
    let base = lattice.index(&cell);
    let mut acc = 0.0;
    for b in 0..(1usize << d) {
        let mut idx = base;
        let mut w = 1.0;
        for a in 0..d {
            if b & (1 << a) != 0 {
                idx += lattice.stride(a);
                w *= local[a];
            } else {
                w *= 1.0 - local[a];
            }
        }
        if w != 0.0 {
            acc += w * values[idx * stride + comp];
        }
    }
    Ok(acc)
}

/// Anything that can be evaluated, with its gradient, on the closed half
/// space. Gradient components past `dim` are zero.
pub trait FieldSampler: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64, GeometryError>;
    fn gradient(&self, x: &[f64]) -> Result<Point, GeometryError>;
    /// Grid spacing behind the samples, if any.
    fn spacing(&self) -> Option<f64> {
        None
    }
}

/// A solved field with its precomputed node gradients.
#[derive(Debug, Clone)]
pub struct GridSampler {
    field: ScalarField,
    gradient: VectorField,
}

impl GridSampler {
    pub fn new(field: ScalarField) -> Self {
        let gradient = field.node_gradient();
        Self { field, gradient }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn gradient_field(&self) -> &VectorField {
        &self.gradient
    }
}

impl FieldSampler for GridSampler {
    fn dim(&self) -> usize {
        self.field.grid().dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64, GeometryError> {
        self.field.interpolate(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Point, GeometryError> {
        self.gradient.interpolate(x)
    }

    fn spacing(&self) -> Option<f64> {
        Some(self.field.grid().max_spacing())
    }
}

/// Closed-form field given by a value and a gradient closure.
pub struct AnalyticField<F, G> {
    dim: usize,
    value: F,
    gradient: G,
}

impl<F, G> AnalyticField<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Point + Sync,
{
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        Self { dim, value, gradient }
    }
}

impl<F, G> FieldSampler for AnalyticField<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Point + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64, GeometryError> {
        Ok((self.value)(x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Point, GeometryError> {
        Ok((self.gradient)(x))
    }
}

/// `c * inner` for a positive or negative constant `c`.
pub struct Scaled<'a, S: ?Sized> {
    pub inner: &'a S,
    pub factor: f64,
}

impl<S: FieldSampler + ?Sized> FieldSampler for Scaled<'_, S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.factor * self.inner.value(x)?)
    }

    fn gradient(&self, x: &[f64]) -> Result<Point, GeometryError> {
        let g = self.inner.gradient(x)?;
        Ok([self.factor * g[0], self.factor * g[1], self.factor * g[2]])
    }

    fn spacing(&self) -> Option<f64> {
        self.inner.spacing()
    }
}
