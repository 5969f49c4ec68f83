use crate::geometry::Point;

use super::OracleError;

/// `u = a r^{3/2} cos(3 theta / 2)` in the `(x_profile, x_n)` plane with
/// `theta in [0, pi]`, constant along the extrusion axis in dimension 3.
/// Contact ray: `theta = pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSignoriniSolution {
    amplitude: f64,
    dim: usize,
    extrusion_axis: usize,
}

impl ExactSignoriniSolution {
    /// Builds the profile and checks harmonicity, the thin-face sign
    /// conditions and complementarity on a probe set.
    pub fn new(amplitude: f64, dim: usize, extrusion_axis: usize) -> Result<Self, OracleError> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(OracleError::InvalidAmplitude(amplitude));
        }
        if !(2..=3).contains(&dim) || (dim == 3 && extrusion_axis > 1) {
            return Err(OracleError::InvalidAxis { dim, axis: extrusion_axis });
        }
        let sol = Self { amplitude, dim, extrusion_axis };
        sol.verify()?;
        Ok(sol)
    }

    pub fn planar(amplitude: f64) -> Result<Self, OracleError> {
        Self::new(amplitude, 2, 0)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Tangential axis carrying the profile.
    pub fn profile_axis(&self) -> usize {
        if self.dim == 3 {
            1 - self.extrusion_axis
        } else {
            0
        }
    }

    fn polar(&self, x: &[f64]) -> (f64, f64) {
        let s = x[self.profile_axis()];
        let t = x[self.dim - 1].max(0.0);
        ((s * s + t * t).sqrt(), t.atan2(s))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (r, theta) = self.polar(x);
        if theta == std::f64::consts::PI {
            // contact ray: cos(3 pi / 2) is not exactly zero in floating point
            return 0.0;
        }
        self.amplitude * r.powf(1.5) * (1.5 * theta).cos()
    }

    /// `grad u = (3/2) a r^{1/2} (cos(theta/2), -sin(theta/2))` in the
    /// profile plane.
    pub fn gradient(&self, x: &[f64]) -> Point {
        let (r, theta) = self.polar(x);
        let s = 1.5 * self.amplitude * r.sqrt();
        let mut g = [0.0; 3];
        g[self.profile_axis()] = s * (0.5 * theta).cos();
        g[self.dim - 1] = -s * (0.5 * theta).sin();
        g
    }

    fn verify(&self) -> Result<(), OracleError> {
        let n = self.dim - 1;
        let step = 1e-4;
        let mut lifted = false;
        for k in 0..24 {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / 24.0;
            let r = 0.3 + 0.02 * k as f64;
            let mut x = [0.0; 3];
            x[self.profile_axis()] = r * theta.cos();
            x[n] = r * theta.sin();
            if self.dim == 3 {
                x[self.extrusion_axis] = 0.1 * k as f64 - 1.0;
            }
            // five-point Laplacian in the profile plane
            let lap = {
                let mut acc = -4.0 * self.value(&x);
                for axis in [self.profile_axis(), n] {
                    let mut p = x;
                    p[axis] += step;
                    let mut m = x;
                    m[axis] -= step;
                    acc += self.value(&p) + self.value(&m);
                }
                acc / (step * step)
            };
            if lap.abs() > 1e-4 {
                return Err(OracleError::Construction(format!("laplacian {lap:.3e} at {x:?}")));
            }
            // thin face: u >= 0, d_n u <= 0, u d_n u = 0
            let mut y = [0.0; 3];
            y[self.profile_axis()] = if k % 2 == 0 { r } else { -r };
            let u = self.value(&y);
            let dn = self.gradient(&y)[n];
            if u < -1e-14 || dn > 1e-14 || (u * dn).abs() > 1e-12 {
                return Err(OracleError::Construction(format!("thin-face conditions fail at {y:?}: u={u}, d_n u={dn}")));
            }
            lifted |= u > 0.0;
        }
        if !lifted {
            return Err(OracleError::Construction("profile vanishes on the whole thin face".into()));
        }
        Ok(())
    }
}
