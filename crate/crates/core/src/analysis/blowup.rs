use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{FieldSampler, GeometryError, HalfGrid, HemisphereRule, Point, ScalarField};

use super::{l2_average, AnalysisError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupOptions {
    /// Decreasing radii `rho_j`.
    pub radii: Vec<f64>,
    /// Node counts of the target grid on `[-1,1]^{n-1} x [0,1]`.
    pub target_nodes: Vec<usize>,
    /// Coarse search step for the tangential rotation (dimension 3).
    pub angle_step_deg: f64,
}

impl BlowupOptions {
    /// `rho_j = 0.4 * 2^{-j}`, `j = 0..=3`.
    pub fn dyadic(dim: usize) -> Self {
        Self {
            radii: (0..4).map(|j| 0.4 * 0.5f64.powi(j)).collect(),
            target_nodes: if dim == 2 { vec![65, 33] } else { vec![33, 33, 17] },
            angle_step_deg: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupStage {
    pub rho: f64,
    /// `rho^{n/2} / ||u||_{L^2(B_rho^+)}`.
    pub lambda: f64,
    /// `||u_j||_{L^2(B_1^+)}`, measured.
    pub l2_norm: f64,
    pub amplitude: f64,
    /// Tangential direction of the fitted profile, degrees (0 in 2D).
    pub rotation_deg: f64,
    /// `||u_j - a phi||_{L^2(B_1^+)}`.
    pub fit_residual: f64,
    /// Max nodal `|u_j - a phi|` on the closed unit half-ball.
    pub c0_distance: f64,
    /// Max of the `c0_distance` and the nodal gradient distance.
    pub c1_distance: f64,
    /// `log2(||u_j||_{L2(B_1)} / ||u_j||_{L2(B_1/2)}) - n/2`.
    pub degree: f64,
    /// Distances to the rescaled discrete reference, when one was given.
    pub reference: Option<ReferenceDistance>,
}

/// Comparison of `u_j` with `b psi_j`, `psi_j(x) = rho_j^{-3/2} psi(rho_j x + y0)`
/// for a reference field `psi` solved on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistance {
    pub amplitude: f64,
    pub c0_distance: f64,
    pub c1_distance: f64,
}

/// A discrete stand-in for the homogeneous profile and its own
/// free-boundary point.
#[derive(Clone, Copy)]
pub struct BlowupReference<'a> {
    pub field: &'a dyn FieldSampler,
    pub center: Point,
}

#[derive(Debug, Clone)]
pub struct BlowupResult {
    pub center: Point,
    pub stages: Vec<BlowupStage>,
    /// Rescaled fields on the target grid, one per stage.
    pub fields: Vec<ScalarField>,
}

impl BlowupResult {
    pub fn final_degree(&self) -> Option<f64> {
        self.stages.last().map(|s| s.degree)
    }
}

/// `lambda u(rho x + x0)`.
struct Rescaled<'a> {
    inner: &'a dyn FieldSampler,
    center: Point,
    rho: f64,
    lambda: f64,
}

impl Rescaled<'_> {
    fn map(&self, x: &[f64]) -> Point {
        let mut y = [0.0; 3];
        for (a, slot) in y.iter_mut().enumerate().take(self.inner.dim()) {
            *slot = self.center[a] + self.rho * x[a];
        }
        y
    }
}

impl FieldSampler for Rescaled<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.lambda * self.inner.value(&self.map(x))?)
    }

    fn gradient(&self, x: &[f64]) -> Result<Point, GeometryError> {
        let g = self.inner.gradient(&self.map(x))?;
        let s = self.lambda * self.rho;
        Ok([s * g[0], s * g[1], s * g[2]])
    }
}

/// Unit-amplitude `r^{3/2} cos(3 theta / 2)` in the plane spanned by the
/// tangential direction at `beta` and the normal.
#[derive(Clone, Copy)]
struct Profile {
    dim: usize,
    dir: [f64; 2],
}

impl Profile {
    fn new(dim: usize, beta: f64) -> Self {
        Self { dim, dir: [beta.cos(), beta.sin()] }
    }

    fn coords(&self, x: &[f64]) -> (f64, f64) {
        let s = if self.dim == 2 { x[0] } else { self.dir[0] * x[0] + self.dir[1] * x[1] };
        (s, x[self.dim - 1].max(0.0))
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (s, t) = self.coords(x);
        let r = s.hypot(t);
        let theta = t.atan2(s);
        if theta == std::f64::consts::PI {
            return 0.0;
        }
        r.powf(1.5) * (1.5 * theta).cos()
    }

    fn gradient(&self, x: &[f64]) -> Point {
        let (s, t) = self.coords(x);
        let r = s.hypot(t);
        let theta = t.atan2(s);
        let k = 1.5 * r.sqrt();
        let (gs, gt) = (k * (0.5 * theta).cos(), -k * (0.5 * theta).sin());
        let mut g = [0.0; 3];
        if self.dim == 2 {
            g[0] = gs;
        } else {
            g[0] = gs * self.dir[0];
            g[1] = gs * self.dir[1];
        }
        g[self.dim - 1] = gt;
        g
    }
}

struct Moments {
    cross: f64,
    phi_sq: f64,
}

fn moments(uj: &dyn FieldSampler, rule: &HemisphereRule, p: &Profile) -> Result<Moments, GeometryError> {
    let q = rule.at(&[0.0; 3], 1.0)?;
    let cross = q.volume_integral(|x| Ok::<_, GeometryError>(uj.value(x)? * p.value(x)))?;
    let phi_sq = q.volume_integral(|x| Ok::<_, GeometryError>(p.value(x).powi(2)))?;
    Ok(Moments { cross, phi_sq })
}

fn fit_rotation(uj: &dyn FieldSampler, rule: &HemisphereRule, dim: usize, step_deg: f64) -> Result<f64, AnalysisError> {
    if dim == 2 {
        return Ok(0.0);
    }
    if !(step_deg > 0.0 && step_deg <= 90.0) {
        return Err(AnalysisError::InvalidParameter(format!("angle step {step_deg}")));
    }
    let score = |deg: f64| -> Result<f64, AnalysisError> {
        let m = moments(uj, rule, &Profile::new(dim, deg.to_radians()))?;
        Ok(m.cross / m.phi_sq.sqrt())
    };
    let steps = (360.0 / step_deg).round() as usize;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..steps {
        let deg = k as f64 * step_deg;
        let s = score(deg)?;
        if s > best.1 {
            best = (deg, s);
        }
    }
    // golden-section polish on the bracketing interval
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best.0 - step_deg, best.0 + step_deg);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (score(x1)?, score(x2)?);
    for _ in 0..40 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = score(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = score(x2)?;
        }
    }
    Ok((0.5 * (lo + hi)).rem_euclid(360.0))
}

/// Normalized rescalings `u_j(x) = lambda_j u(rho_j x + x0)` and their
/// distance to the best-fitting `3/2`-homogeneous profile.
pub fn blowup(
    u: &dyn FieldSampler,
    rule: &HemisphereRule,
    center: &[f64],
    options: &BlowupOptions,
    reference: Option<BlowupReference<'_>>,
) -> Result<BlowupResult, AnalysisError> {
    let dim = u.dim();
    if options.radii.is_empty() || options.radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(AnalysisError::InvalidParameter("blow-up radii must be strictly decreasing".into()));
    }
    let target = Arc::new(HalfGrid::new(dim, &options.target_nodes)?);
    let mut c = [0.0; 3];
    c[..dim].copy_from_slice(&center[..dim]);

    let mut stages = Vec::new();
    let mut fields = Vec::new();
    for &rho in &options.radii {
        let avg = l2_average(u, rule, &c, rho)?;
        if !(avg > 1e-150) {
            return Err(AnalysisError::DegenerateScale { rho, what: "||u||_{L2(B_rho^+)}", value: avg });
        }
        let uj = Rescaled { inner: u, center: c, rho, lambda: 1.0 / avg };
        let l2_norm = l2_average(&uj, rule, &[0.0; 3], 1.0)?;
        // averaged norms: ||u_j||_1 / ||u_j||_{1/2} = 2^degree for homogeneous u_j
        let degree = (l2_norm / l2_average(&uj, rule, &[0.0; 3], 0.5)?).log2();

        let rotation_deg = fit_rotation(&uj, rule, dim, options.angle_step_deg)?;
        let profile = Profile::new(dim, rotation_deg.to_radians());
        let m = moments(&uj, rule, &profile)?;
        let amplitude = m.cross / m.phi_sq;
        let q = rule.at(&[0.0; 3], 1.0)?;
        let misfit = q.volume_integral(|x| Ok::<_, GeometryError>((uj.value(x)? - amplitude * profile.value(x)).powi(2)))?;

        let psi = reference.map(|r| Rescaled { inner: r.field, center: r.center, rho, lambda: rho.powf(-1.5) });
        let psi_amplitude = match &psi {
            Some(p) => {
                let cross = q.volume_integral(|x| Ok::<_, GeometryError>(uj.value(x)? * p.value(x)?))?;
                let sq = q.volume_integral(|x| Ok::<_, GeometryError>(p.value(x)?.powi(2)))?;
                cross / sq
            }
            None => 0.0,
        };
        let (mut r0, mut r1): (f64, f64) = (0.0, 0.0);

        let mut values = vec![0.0; target.node_count()];
        let mut c0: f64 = 0.0;
        let mut c1: f64 = 0.0;
        for (i, slot) in values.iter_mut().enumerate() {
            let x = target.coords(i);
            let v = match uj.value(&x) {
                Ok(v) => v,
                Err(GeometryError::OutOfExtent { .. }) => continue,
                Err(e) => return Err(e.into()),
            };
            *slot = v;
            if (0..dim).map(|a| x[a] * x[a]).sum::<f64>() > 1.0 + 1e-12 {
                continue;
            }
            c0 = c0.max((v - amplitude * profile.value(&x)).abs());
            let g = uj.gradient(&x)?;
            let gp = profile.gradient(&x);
            let d = (0..dim).map(|a| (g[a] - amplitude * gp[a]).powi(2)).sum::<f64>().sqrt();
            c1 = c1.max(d);
            if let Some(p) = &psi {
                r0 = r0.max((v - psi_amplitude * p.value(&x)?).abs());
                let gq = p.gradient(&x)?;
                let d = (0..dim).map(|a| (g[a] - psi_amplitude * gq[a]).powi(2)).sum::<f64>().sqrt();
                r1 = r1.max(d);
            }
        }
        fields.push(ScalarField::new(target.clone(), values)?);
        stages.push(BlowupStage {
            rho,
            lambda: 1.0 / avg,
            l2_norm,
            amplitude,
            rotation_deg,
            fit_residual: misfit.sqrt(),
            c0_distance: c0,
            c1_distance: c1.max(c0),
            degree,
            reference: psi.map(|_| ReferenceDistance { amplitude: psi_amplitude, c0_distance: r0, c1_distance: r1.max(r0) }),
        });
    }
    Ok(BlowupResult { center: c, stages, fields })
}
