//! Radial energy densities `f(p) = h(|p|)` and the maps derived from `h`.
//!
//! Every built-in profile carries closed-form `h`, `h'` and `h''`. Finite
//! differences appear only in [`verify_structure`], where they cross-check
//! the analytic derivatives.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlinearityError {
    #[error("non-finite gradient argument {0:?}")]
    NonFinite(Vec<f64>),
    #[error("perturbation coefficient must be finite and nonnegative, got {0}")]
    InvalidCoefficient(f64),
    #[error("structure check needs probe_radius > 0 and sample_count >= 1")]
    InvalidProbe,
}

/// Name-tagged selection as it appears in a run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Quadratic,
    MinimalSurface,
    PerturbedQuadratic {
        #[serde(default = "default_perturbation")]
        c: f64,
    },
}

fn default_perturbation() -> f64 {
    0.1
}

impl NonlinearitySpec {
    pub fn build(self) -> Result<NonlinearityModel, NonlinearityError> {
        match self {
            NonlinearitySpec::Quadratic => Ok(NonlinearityModel::quadratic()),
            NonlinearitySpec::MinimalSurface => Ok(NonlinearityModel::minimal_surface()),
            NonlinearitySpec::PerturbedQuadratic { c } => NonlinearityModel::perturbed_quadratic(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    Quadratic,
    MinimalSurface,
    /// `h'' = 1 + 6 c t psi(t)` with `psi = 1` on `[0, 1/2]`, a quintic
    /// smoothstep down to zero on `[1/2, 1]`, and `psi = 0` after.
    PerturbedQuadratic { c: f64 },
}

/// An energy profile `h` together with its small-gradient constants.
///
/// `t_bar` is the radius on which `|h''(t) - 1| <= remainder_constant * t`
/// and `|omega1(t)| <= remainder_constant * t` hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearityModel {
    profile: Profile,
    pub t_bar: f64,
    pub remainder_constant: f64,
}

// Coefficients in sigma = 2t - 1 of the transition pieces of the perturbed
// profile: P = integral of 6 s psi(s), Q = integral of P.
const TRANSITION_P: [f64; 8] = [
    3.0 / 4.0,
    3.0 / 2.0,
    3.0 / 4.0,
    0.0,
    -15.0 / 4.0,
    3.0 / 2.0,
    9.0 / 4.0,
    -9.0 / 7.0,
];
const TRANSITION_Q: [f64; 9] = [
    1.0 / 8.0,
    3.0 / 8.0,
    3.0 / 8.0,
    1.0 / 8.0,
    0.0,
    -3.0 / 8.0,
    1.0 / 8.0,
    9.0 / 56.0,
    -9.0 / 112.0,
];
const P_AT_ONE: f64 = 12.0 / 7.0;
const Q_AT_ONE: f64 = 93.0 / 112.0;

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn smoothstep(s: f64) -> f64 {
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

/// `psi(t)`: 1 below 1/2, 0 above 1.
fn cutoff(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - smoothstep(2.0 * t - 1.0)
    }
}

/// `P(t) = int_0^t 6 s psi(s) ds`, so `h'(t) = t + c P(t)`.
fn perturbation_p(t: f64) -> f64 {
    if t <= 0.5 {
        3.0 * t * t
    } else if t >= 1.0 {
        P_AT_ONE
    } else {
        horner(&TRANSITION_P, 2.0 * t - 1.0)
    }
}

/// `Q(t) = int_0^t P(s) ds`, so `h(t) = t^2/2 + c Q(t)`.
fn perturbation_q(t: f64) -> f64 {
    if t <= 0.5 {
        t * t * t
    } else if t >= 1.0 {
        Q_AT_ONE + P_AT_ONE * (t - 1.0)
    } else {
        horner(&TRANSITION_Q, 2.0 * t - 1.0)
    }
}

impl NonlinearityModel {
    /// Dirichlet energy, `h(t) = t^2 / 2`.
    pub fn quadratic() -> Self {
        Self { profile: Profile::Quadratic, t_bar: 1.0, remainder_constant: 0.0 }
    }

    /// Area functional, `h(t) = sqrt(1 + t^2) - 1`.
    pub fn minimal_surface() -> Self {
        // (1 - (1+t^2)^{-3/2}) / t peaks inside (0, 1] near t = 0.8486 and
        // dominates the omega1 ratio (1 - (1+t^2)^{-1/2}) / t.
        let ratio = |t: f64| (1.0 - (1.0 + t * t).powf(-1.5)) / t;
        Self {
            profile: Profile::MinimalSurface,
            t_bar: 1.0,
            remainder_constant: golden_max(ratio, 0.0, 1.0),
        }
    }

    /// `h(t) = t^2/2 + c t^3` for `t <= 1/2`, smoothly returning to a
    /// quadratic second derivative by `t = 1`. Convex for every `c >= 0`.
    pub fn perturbed_quadratic(c: f64) -> Result<Self, NonlinearityError> {
        if !c.is_finite() || c < 0.0 {
            return Err(NonlinearityError::InvalidCoefficient(c));
        }
        Ok(Self {
            profile: Profile::PerturbedQuadratic { c },
            t_bar: 1.0,
            remainder_constant: 6.0 * c,
        })
    }

    pub fn name(&self) -> &'static str {
        match self.profile {
            Profile::Quadratic => "quadratic",
            Profile::MinimalSurface => "minimal_surface",
            Profile::PerturbedQuadratic { .. } => "perturbed_quadratic",
        }
    }

    pub fn spec(&self) -> NonlinearitySpec {
        match self.profile {
            Profile::Quadratic => NonlinearitySpec::Quadratic,
            Profile::MinimalSurface => NonlinearitySpec::MinimalSurface,
            Profile::PerturbedQuadratic { c } => NonlinearitySpec::PerturbedQuadratic { c },
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.profile, Profile::Quadratic)
            || matches!(self.profile, Profile::PerturbedQuadratic { c } if c == 0.0)
    }

    pub fn h(&self, t: f64) -> f64 {
        match self.profile {
            Profile::Quadratic => 0.5 * t * t,
            Profile::MinimalSurface => {
                // sqrt(1+t^2) - 1 without cancellation for small t
                let s = (1.0 + t * t).sqrt();
                t * t / (s + 1.0)
            }
            Profile::PerturbedQuadratic { c } => 0.5 * t * t + c * perturbation_q(t),
        }
    }

    pub fn h1(&self, t: f64) -> f64 {
        t * self.h1_over_t(t)
    }

    pub fn h2(&self, t: f64) -> f64 {
        match self.profile {
            Profile::Quadratic => 1.0,
            Profile::MinimalSurface => (1.0 + t * t).powf(-1.5),
            Profile::PerturbedQuadratic { c } => 1.0 + 6.0 * c * t * cutoff(t),
        }
    }

    /// `h'(t) / t`, continuous at `t = 0` with value `h''(0) = 1`.
    pub fn h1_over_t(&self, t: f64) -> f64 {
        match self.profile {
            Profile::Quadratic => 1.0,
            Profile::MinimalSurface => 1.0 / (1.0 + t * t).sqrt(),
            Profile::PerturbedQuadratic { c } => {
                if t <= 0.5 {
                    1.0 + 3.0 * c * t
                } else {
                    1.0 + c * perturbation_p(t) / t
                }
            }
        }
    }

    /// Coefficients `(a, b)` with `hessian(p) = a I + b p p^T`.
    ///
    /// `b = (h''(t) - h'(t)/t) / t^2`; the product `b t^2` stays bounded as
    /// `t -> 0`, which is all the callers need.
    pub fn hessian_coefficients(&self, t: f64) -> (f64, f64) {
        let a = self.h1_over_t(t);
        if t == 0.0 {
            return (a, 0.0);
        }
        let b = match self.profile {
            Profile::Quadratic => 0.0,
            Profile::MinimalSurface => {
                let s = 1.0 + t * t;
                // (s^{-3/2} - s^{-1/2}) / t^2 = -s^{-3/2}
                -s.powf(-1.5)
            }
            Profile::PerturbedQuadratic { c } => {
                if t <= 0.5 {
                    // (1 + 6ct) - (1 + 3ct) = 3ct
                    3.0 * c / t
                } else {
                    (self.h2(t) - a) / (t * t)
                }
            }
        };
        (a, b)
    }

    /// `f(p) = h(|p|)`.
    pub fn energy_density(&self, p: &[f64]) -> f64 {
        self.h(norm(p))
    }

    /// `grad_p f(p) = h'(|p|) p / |p|`, zero at `p = 0`.
    pub fn flux(&self, p: &[f64]) -> Result<Vec<f64>, NonlinearityError> {
        check_finite(p)?;
        let a = self.h1_over_t(norm(p));
        Ok(p.iter().map(|&x| a * x).collect())
    }

    /// `grad_p^2 f(p)`; the identity at `p = 0`.
    pub fn hessian(&self, p: &[f64]) -> Result<DMatrix<f64>, NonlinearityError> {
        check_finite(p)?;
        let n = p.len();
        let (a, b) = self.hessian_coefficients(norm(p));
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { a } else { 0.0 };
            diag + b * (p[i] * p[j])
        }))
    }

    /// `omega1(t) = h'(t)/t - 1`, zero at `t = 0`.
    pub fn omega1(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            self.h1_over_t(t) - 1.0
        }
    }

    /// `omega2(t) = h''(t) - 1`.
    pub fn omega2(&self, t: f64) -> f64 {
        self.h2(t) - 1.0
    }

    /// Smallest Hessian eigenvalue over `|p| <= m`, from a dense radial scan.
    /// The Hessian of a radial density has eigenvalues `h''(t)` and `h'(t)/t`.
    pub fn ellipticity_floor(&self, m: f64) -> f64 {
        const STEPS: usize = 4096;
        (0..=STEPS)
            .map(|i| {
                let t = m * i as f64 / STEPS as f64;
                self.h2(t).min(self.h1_over_t(t))
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Maximum of a unimodal function on `[lo, hi]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        }
    }
    fa.max(fb)
}

pub(crate) fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_finite(p: &[f64]) -> Result<(), NonlinearityError> {
    if p.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(NonlinearityError::NonFinite(p.to_vec()))
    }
}

/// Worst-case discrepancies found by [`verify_structure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub model: String,
    pub probe_radius: f64,
    pub dim: usize,
    pub probes: usize,
    /// `max |p - flux(p)| / |p|^2` over the probes.
    pub flux_remainder_ratio: f64,
    /// `max |h''(|p|) - 1| / |p|` over the probes.
    pub h2_remainder_ratio: f64,
    /// Constant the two ratios were checked against.
    pub remainder_constant: f64,
    pub max_hessian_asymmetry: f64,
    /// Estimated `lambda(M)`: smallest Hessian eigenvalue seen.
    pub lambda_min: f64,
    /// Relative flux error against central differences of `f` (step 1e-5).
    pub flux_fd_rel_error: f64,
    /// Relative Hessian error against second differences of `f` (step 1e-4).
    pub hessian_fd_rel_error: f64,
    /// `max |omega2 - omega1 - t omega1'|`, `omega1'` by central differences.
    pub omega_identity_error: f64,
    /// Most negative `(flux(p) - flux(q)) . (p - q)` over probe pairs.
    pub min_flux_monotonicity: f64,
    pub violations: Vec<String>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const FLUX_FD_STEP: f64 = 1e-5;
const HESSIAN_FD_STEP: f64 = 1e-4;
const FD_MIN_RADIUS: f64 = 1e-3;

/// Probes the structure assumptions of `model` on `|p| <= probe_radius` in
/// dimension `dim`, using `sample_count` quasi-random probes plus a radial
/// scan through `|p| = probe_radius`.
pub fn verify_structure(
    model: &NonlinearityModel,
    dim: usize,
    probe_radius: f64,
    sample_count: usize,
    seed: u64,
) -> Result<StructureReport, NonlinearityError> {
    if !(probe_radius > 0.0) || sample_count == 0 || dim == 0 {
        return Err(NonlinearityError::InvalidProbe);
    }
    let probes = probe_set(dim, probe_radius, sample_count, seed);

    let mut flux_remainder_ratio: f64 = 0.0;
    let mut h2_remainder_ratio: f64 = 0.0;
    let mut max_hessian_asymmetry: f64 = 0.0;
    let mut lambda_min = f64::INFINITY;
    let mut flux_fd_rel_error: f64 = 0.0;
    let mut hessian_fd_rel_error: f64 = 0.0;
    let mut omega_identity_error: f64 = 0.0;
    let mut violations = Vec::new();

    for p in &probes {
        let t = norm(p);
        let q = model.flux(p)?;
        let hess = model.hessian(p)?;

        if t > 0.0 && t <= model.t_bar {
            let diff: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
            flux_remainder_ratio = flux_remainder_ratio.max(norm(&diff) / (t * t));
            h2_remainder_ratio = h2_remainder_ratio.max(model.omega2(t).abs() / t);
        }

        for i in 0..dim {
            for j in 0..i {
                max_hessian_asymmetry = max_hessian_asymmetry.max((hess[(i, j)] - hess[(j, i)]).abs());
            }
        }
        let eig = SymmetricEigen::new(hess.clone()).eigenvalues;
        let smallest = eig.iter().copied().fold(f64::INFINITY, f64::min);
        lambda_min = lambda_min.min(smallest);
        if !(smallest > 0.0) {
            violations.push(format!("hessian not positive definite at |p| = {t:.6e} (min eigenvalue {smallest:.3e})"));
        }

        if t >= FD_MIN_RADIUS {
            let fd = fd_gradient(model, p, FLUX_FD_STEP);
            let err: Vec<f64> = fd.iter().zip(&q).map(|(a, b)| a - b).collect();
            flux_fd_rel_error = flux_fd_rel_error.max(norm(&err) / norm(&q));

            let fd_h = fd_hessian(model, p, HESSIAN_FD_STEP);
            let scale = frobenius(&hess);
            let err = frobenius(&(&fd_h - &hess));
            hessian_fd_rel_error = hessian_fd_rel_error.max(err / scale);

            let step = 1e-5 * t.max(1e-2);
            let d_omega1 = (model.omega1(t + step) - model.omega1(t - step)) / (2.0 * step);
            let identity = model.omega2(t) - model.omega1(t) - t * d_omega1;
            omega_identity_error = omega_identity_error.max(identity.abs());
        }
    }

    let mut min_flux_monotonicity = f64::INFINITY;
    for pair in probes.windows(2) {
        let (p, q) = (&pair[0], &pair[1]);
        let fp = model.flux(p)?;
        let fq = model.flux(q)?;
        let dot: f64 = (0..dim).map(|i| (fp[i] - fq[i]) * (p[i] - q[i])).sum();
        min_flux_monotonicity = min_flux_monotonicity.min(dot);
    }

    let bound = model.remainder_constant * (1.0 + 1e-12) + 1e-14;
    if flux_remainder_ratio > bound {
        violations.push(format!(
            "flux remainder ratio {flux_remainder_ratio:.6e} exceeds constant {:.6e}",
            model.remainder_constant
        ));
    }
    if h2_remainder_ratio > bound {
        violations.push(format!(
            "h'' remainder ratio {h2_remainder_ratio:.6e} exceeds constant {:.6e}",
            model.remainder_constant
        ));
    }
    if max_hessian_asymmetry > 0.0 {
        violations.push(format!("hessian asymmetry {max_hessian_asymmetry:.3e}"));
    }
    if flux_fd_rel_error > 1e-6 {
        violations.push(format!("flux disagrees with finite differences of f: {flux_fd_rel_error:.3e}"));
    }
    if hessian_fd_rel_error > 1e-5 {
        violations.push(format!("hessian disagrees with second differences of f: {hessian_fd_rel_error:.3e}"));
    }
    if omega_identity_error > 1e-6 {
        violations.push(format!("omega2 = omega1 + t omega1' off by {omega_identity_error:.3e}"));
    }
    if min_flux_monotonicity < -1e-14 {
        violations.push(format!("flux not monotone: {min_flux_monotonicity:.3e}"));
    }

    Ok(StructureReport {
        model: model.name().to_string(),
        probe_radius,
        dim,
        probes: probes.len(),
        flux_remainder_ratio,
        h2_remainder_ratio,
        remainder_constant: model.remainder_constant,
        max_hessian_asymmetry,
        lambda_min,
        flux_fd_rel_error,
        hessian_fd_rel_error,
        omega_identity_error,
        min_flux_monotonicity,
        violations,
    })
}

/// Halton points in the ball of radius `m` (Cranley-Patterson shifted by
/// `seed`), followed by a radial ladder `m i / k` along a fixed direction.
fn probe_set(dim: usize, m: f64, k: usize, seed: u64) -> Vec<Vec<f64>> {
    const PRIMES: [u32; 4] = [2, 3, 5, 7];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..=dim).map(|_| rng.random::<f64>()).collect();
    let mut probes = Vec::with_capacity(2 * k + 1);
    for i in 1..=k {
        // direction from `dim` Gaussian-ish coordinates, radius from one more
        let coords: Vec<f64> = (0..=dim)
            .map(|d| (radical_inverse(i as u64, PRIMES[d]) + shift[d]).fract())
            .collect();
        let dir: Vec<f64> = coords[..dim].iter().map(|&u| 2.0 * u - 1.0).collect();
        let len = norm(&dir);
        if len < 1e-9 {
            continue;
        }
        let r = m * coords[dim].powf(1.0 / dim as f64);
        probes.push(dir.iter().map(|x| r * x / len).collect());
    }
    let mut axis = vec![0.0; dim];
    for (d, a) in axis.iter_mut().enumerate() {
        *a = 1.0 / ((d + 1) as f64);
    }
    let len = norm(&axis);
    for i in 0..=k {
        let r = m * i as f64 / k as f64;
        probes.push(axis.iter().map(|x| r * x / len).collect());
    }
    probes
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * inv;
        i /= b;
        inv /= base as f64;
    }
    out
}

fn fd_gradient(model: &NonlinearityModel, p: &[f64], step: f64) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let mut plus = p.to_vec();
            let mut minus = p.to_vec();
            plus[i] += step;
            minus[i] -= step;
            (model.energy_density(&plus) - model.energy_density(&minus)) / (2.0 * step)
        })
        .collect()
}

fn fd_hessian(model: &NonlinearityModel, p: &[f64], step: f64) -> DMatrix<f64> {
    let n = p.len();
    let f = |shift: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(i, s) in shift {
            q[i] += s;
        }
        model.energy_density(&q)
    };
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (f(&[(i, step)]) - 2.0 * f(&[]) + f(&[(i, -step)])) / (step * step)
        } else {
            (f(&[(i, step), (j, step)]) - f(&[(i, step), (j, -step)]) - f(&[(i, -step), (j, step)])
                + f(&[(i, -step), (j, -step)]))
                / (4.0 * step * step)
        }
    })
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}
