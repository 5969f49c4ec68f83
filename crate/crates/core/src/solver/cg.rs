/// Result of a preconditioned conjugate-gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    /// A direction of nonpositive curvature was met.
    pub breakdown: bool,
}

/// Jacobi-preconditioned CG for `A x = b` restricted to `mask[i] == true`.
///
/// `apply(v, out)` must write `A v` into `out`; entries outside the mask are
/// ignored on input and output. `x` holds the initial guess on entry.
#[allow(clippy::too_many_arguments)]
pub fn pcg<F>(
    mut apply: F,
    diag: &[f64],
    mask: &[bool],
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    abs_tol: f64,
    max_iterations: usize,
) -> CgOutcome
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let dot = |p: &[f64], q: &[f64]| -> f64 { (0..n).filter(|&i| mask[i]).map(|i| p[i] * q[i]).sum() };
    for i in 0..n {
        if !mask[i] {
            x[i] = 0.0;
        }
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|i| if mask[i] { b[i] - ax[i] } else { 0.0 }).collect();
    let inv: Vec<f64> = diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut z: Vec<f64> = (0..n).map(|i| r[i] * inv[i]).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let b_norm = dot(b, b).sqrt();
    let target = (rel_tol * b_norm).max(abs_tol);
    let mut res = dot(&r, &r).sqrt();
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while res > target && it < max_iterations {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgOutcome { iterations: it, residual_norm: res, converged: false, breakdown: true };
        }
        let alpha = rz / pap;
        for i in 0..n {
            if mask[i] {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
                z[i] = r[i] * inv[i];
            }
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = if mask[i] { z[i] + beta * p[i] } else { 0.0 };
        }
        res = dot(&r, &r).sqrt();
        it += 1;
    }
    CgOutcome { iterations: it, residual_norm: res, converged: res <= target, breakdown: false }
}
