//! Spectral projected gradient: Barzilai-Borwein step lengths with a
//! monotone Armijo search along the projected direction.

use super::{Problem, RunOutcome, SolveConfig};

/// Energy increase tolerated when the decrease is below roundoff.
pub(crate) fn roundoff_slack(e: f64) -> f64 {
    5e-14 * e.abs().max(1.0)
}

/// One projected-gradient step from `u`. Returns the new energy, or `None`
/// if no step reduced either the energy or the KKT residual.
pub(crate) fn pg_step(problem: &Problem<'_>, cfg: &SolveConfig, u: &mut Vec<f64>, grad: &[f64], energy: f64, lambda: f64) -> Option<f64> {
    let mut trial: Vec<f64> = u.iter().zip(grad).map(|(x, g)| x - lambda * g).collect();
    problem.project(&mut trial);
    let d: Vec<f64> = trial.iter().zip(u.iter()).map(|(t, x)| t - x).collect();
    let slope: f64 = d.iter().zip(grad).map(|(a, b)| a * b).sum();
    if slope >= 0.0 {
        return roundoff_accept(problem, u, trial, grad, energy);
    }
    let mut t = 1.0;
    for _ in 0..60 {
        let cand: Vec<f64> = u.iter().zip(&d).map(|(x, di)| x + t * di).collect();
        let e = problem.op.energy(&cand);
        if e <= energy + cfg.armijo * t * slope {
            *u = cand;
            return Some(e);
        }
        t *= 0.5;
    }
    roundoff_accept(problem, u, trial, grad, energy)
}

/// Takes `cand` when the energy is flat to roundoff and the KKT residual
/// drops.
pub(crate) fn roundoff_accept(problem: &Problem<'_>, u: &mut Vec<f64>, cand: Vec<f64>, grad: &[f64], energy: f64) -> Option<f64> {
    let e = problem.op.energy(&cand);
    if e > energy + roundoff_slack(energy) {
        return None;
    }
    let before = problem.kkt(u, grad).max();
    let after = problem.kkt(&cand, &problem.masked_gradient(&cand)).max();
    if after < before {
        *u = cand;
        Some(e)
    } else {
        None
    }
}

pub(crate) fn run(problem: &Problem<'_>, cfg: &SolveConfig, u: &mut Vec<f64>) -> RunOutcome {
    let mut energy = problem.op.energy(u);
    let mut history = vec![energy];
    let mut grad = problem.masked_gradient(u);
    let mut lambda = {
        let g_inf = grad.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if g_inf > 0.0 { (1.0 / g_inf).clamp(cfg.bb_min, cfg.bb_max) } else { 1.0 }
    };
    let mut iterations = 0;
    let mut failure = None;
    while iterations < cfg.max_iterations {
        if problem.kkt(u, &grad).within(problem.tol) {
            break;
        }
        let prev = u.clone();
        match pg_step(problem, cfg, u, &grad, energy, lambda) {
            Some(e) => energy = e,
            None => {
                failure = Some(format!("projected-gradient step made no progress at iteration {iterations}"));
                break;
            }
        }
        iterations += 1;
        history.push(energy);
        let new_grad = problem.masked_gradient(u);
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..u.len() {
            let s = u[i] - prev[i];
            ss += s * s;
            sy += s * (new_grad[i] - grad[i]);
        }
        lambda = if sy > 0.0 { (ss / sy).clamp(cfg.bb_min, cfg.bb_max) } else { cfg.bb_max.min(1e3 * lambda) };
        grad = new_grad;
    }
    RunOutcome { iterations, linear_iterations: 0, energy_history: history, failure }
}
