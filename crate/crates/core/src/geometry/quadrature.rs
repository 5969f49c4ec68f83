use std::f64::consts::PI;

use super::{GeometryError, Lattice, Point};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Quadrature on the unit half-sphere `(dB_1)^+` and unit half-ball `B_1^+`,
/// scaled to any center and radius by [`HemisphereRule::at`].
#[derive(Debug, Clone)]
pub struct HemisphereRule {
    dim: usize,
    surface: Vec<(Point, f64)>,
    volume: Vec<(Point, f64)>,
}

pub const DEFAULT_ANGULAR: usize = 32;
pub const DEFAULT_RADIAL: usize = 16;

impl HemisphereRule {
    /// Tensor Gauss-Legendre rule: `angular` points per angle, `radial`
    /// points along the radius.
    pub fn new(dim: usize, angular: usize, radial: usize) -> Result<Self, GeometryError> {
        if !(2..=3).contains(&dim) {
            return Err(GeometryError::UnsupportedDim(dim));
        }
        let (ta, wa) = gauss_legendre(angular);
        let (tr, wr) = gauss_legendre(radial);
        // radial nodes on [0, 1]
        let radii: Vec<(f64, f64)> = tr.iter().zip(&wr).map(|(&t, &w)| (0.5 * (t + 1.0), 0.5 * w)).collect();

        let mut surface = Vec::new();
        if dim == 2 {
            for (&t, &w) in ta.iter().zip(&wa) {
                let theta = 0.5 * PI * (t + 1.0);
                surface.push(([theta.cos(), theta.sin(), 0.0], 0.5 * PI * w));
            }
        } else {
            // polar angle from +e_n on [0, pi/2], azimuth on [0, 2 pi]
            for (&tp, &wp) in ta.iter().zip(&wa) {
                let phi = 0.25 * PI * (tp + 1.0);
                for (&tq, &wq) in ta.iter().zip(&wa) {
                    let psi = PI * (tq + 1.0);
                    let dir = [phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()];
                    surface.push((dir, phi.sin() * 0.25 * PI * wp * PI * wq));
                }
            }
        }
        let mut volume = Vec::with_capacity(surface.len() * radii.len());
        for &(r, wr) in &radii {
            let jac = r.powi(dim as i32 - 1);
            for &(dir, ws) in &surface {
                volume.push(([r * dir[0], r * dir[1], r * dir[2]], jac * wr * ws));
            }
        }
        Ok(Self { dim, surface, volume })
    }

    pub fn default_for(dim: usize) -> Result<Self, GeometryError> {
        Self::new(dim, DEFAULT_ANGULAR, DEFAULT_RADIAL)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rule on `B_rho^+(center)`. `center` must lie on `x_n = 0`.
    pub fn at(&self, center: &[f64], radius: f64) -> Result<HemisphereQuadrature<'_>, GeometryError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidRadius(radius));
        }
        if center[self.dim - 1] != 0.0 {
            return Err(GeometryError::CenterOffPlane(center[..self.dim].to_vec()));
        }
        let mut c = [0.0; 3];
        c[..self.dim].copy_from_slice(&center[..self.dim]);
        Ok(HemisphereQuadrature { rule: self, center: c, radius })
    }
}

/// A [`HemisphereRule`] placed at a center and radius.
#[derive(Debug, Clone, Copy)]
pub struct HemisphereQuadrature<'a> {
    rule: &'a HemisphereRule,
    center: Point,
    radius: f64,
}

impl HemisphereQuadrature<'_> {
    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.rule.dim
    }

    fn place(&self, unit: &Point) -> Point {
        let mut x = [0.0; 3];
        for a in 0..self.rule.dim {
            x[a] = self.center[a] + self.radius * unit[a];
        }
        x
    }

    pub fn surface_points(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        let scale = self.radius.powi(self.rule.dim as i32 - 1);
        self.rule.surface.iter().map(move |(p, w)| (self.place(p), w * scale))
    }

    pub fn volume_points(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        let scale = self.radius.powi(self.rule.dim as i32);
        self.rule.volume.iter().map(move |(p, w)| (self.place(p), w * scale))
    }

    /// `B_rho^+(center)` fits inside the lattice box.
    pub fn fits_in(&self, lattice: &Lattice) -> bool {
        let d = self.rule.dim;
        let mut lo = self.center;
        let mut hi = self.center;
        for a in 0..d - 1 {
            lo[a] -= self.radius;
            hi[a] += self.radius;
        }
        hi[d - 1] += self.radius;
        lattice.contains(&lo) && lattice.contains(&hi)
    }

    pub fn surface_integral<E>(&self, f: impl Fn(&Point) -> Result<f64, E>) -> Result<f64, E> {
        let terms: Result<Vec<f64>, E> = self.surface_points().map(|(x, w)| Ok(w * f(&x)?)).collect();
        Ok(pairwise_sum(&terms?))
    }

    pub fn volume_integral<E>(&self, f: impl Fn(&Point) -> Result<f64, E>) -> Result<f64, E> {
        let terms: Result<Vec<f64>, E> = self.volume_points().map(|(x, w)| Ok(w * f(&x)?)).collect();
        Ok(pairwise_sum(&terms?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Never = std::convert::Infallible;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!(rel(m30, 2.0 / 31.0) < 1e-13);
    }

    #[test]
    fn constant_integrands() {
        let r2 = HemisphereRule::default_for(2).unwrap();
        let q = r2.at(&[0.1, 0.0], 0.3).unwrap();
        let one = |_: &Point| Ok::<_, Never>(1.0);
        assert!(rel(q.surface_integral(one).unwrap(), PI * 0.3) < 1e-13);
        assert!(rel(q.volume_integral(one).unwrap(), 0.5 * PI * 0.09) < 1e-13);

        let r3 = HemisphereRule::default_for(3).unwrap();
        let q = r3.at(&[0.0, 0.2, 0.0], 0.4).unwrap();
        assert!(rel(q.surface_integral(one).unwrap(), 2.0 * PI * 0.16) < 1e-12);
        assert!(rel(q.volume_integral(one).unwrap(), 2.0 / 3.0 * PI * 0.064) < 1e-12);
    }

    #[test]
    fn degree_two_exactness() {
        // int over half-ball of x1^2 = rho^{n+2} |S^{n-1}| / (2 n (n+2)) and
        // of x_n^2 the same by symmetry; surface: rho^{n+1} |S^{n-1}| / (2n).
        for (dim, sphere) in [(2usize, 2.0 * PI), (3, 4.0 * PI)] {
            let rule = HemisphereRule::default_for(dim).unwrap();
            let rho: f64 = 0.37;
            let q = rule.at(&[0.0; 3], rho).unwrap();
            let n = dim as f64;
            let vol_exact = rho.powf(n + 2.0) * sphere / (2.0 * n * (n + 2.0));
            let surf_exact = rho.powf(n + 1.0) * sphere / (2.0 * n);
            for axis in [0, dim - 1] {
                let f = |x: &Point| Ok::<_, Never>(x[axis] * x[axis]);
                assert!(rel(q.volume_integral(f).unwrap(), vol_exact) < 1e-10);
                assert!(rel(q.surface_integral(f).unwrap(), surf_exact) < 1e-10);
            }
            // odd moment in tangential direction vanishes; x_n moment does not
            let xn = |x: &Point| Ok::<_, Never>(x[dim - 1]);
            let expect = if dim == 2 { 2.0 * rho.powi(3) / 3.0 } else { PI * rho.powi(4) / 4.0 };
            assert!(rel(q.volume_integral(xn).unwrap(), expect) < 1e-10);
        }
    }

    #[test]
    fn oracle_surface_integral() {
        let rule = HemisphereRule::default_for(2).unwrap();
        let q = rule.at(&[0.0, 0.0], 0.5).unwrap();
        let f = |x: &Point| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let th = x[1].atan2(x[0]);
            Ok::<_, Never>((r.powf(1.5) * (1.5 * th).cos()).powi(2))
        };
        let v = q.surface_integral(f).unwrap();
        assert!((v - 0.5f64.powi(4) * PI / 2.0).abs() < 1e-12);
        assert!((v - 0.0981748).abs() < 1e-7);
    }

    #[test]
    fn kinked_integrand_converges_at_nominal_rate() {
        // |cos theta| has a kink at pi/2: Gauss-Legendre error decays like n^-2.
        let exact = 2.0;
        let mut errs = Vec::new();
        let ns = [8usize, 16, 32, 64];
        for &n in &ns {
            let rule = HemisphereRule::new(2, n, 4).unwrap();
            let q = rule.at(&[0.0, 0.0], 1.0).unwrap();
            let v = q.surface_integral(|x| Ok::<_, Never>(x[0].abs())).unwrap();
            errs.push((v - exact).abs());
        }
        for k in 1..errs.len() {
            let order = (errs[k - 1] / errs[k]).log2();
            assert!(order >= 1.5, "observed order {order} ({errs:?})");
        }
    }

    #[test]
    fn pairwise_matches_naive_for_exact_sums() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }

    #[test]
    fn rejects_bad_placement() {
        let rule = HemisphereRule::default_for(2).unwrap();
        assert!(rule.at(&[0.0, 0.1], 0.2).is_err());
        assert!(rule.at(&[0.0, 0.0], -1.0).is_err());
    }
}
