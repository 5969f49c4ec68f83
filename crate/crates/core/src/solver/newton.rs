//! Projected Newton with an epsilon-active set: Newton steps on the free
//! nodes, scaled gradient steps on the nodes about to hit the obstacle, and
//! an Armijo search along the projection arc.

use super::cg::pcg;
use super::projected_gradient::{pg_step, roundoff_accept};
use super::{Problem, RunOutcome, SolveConfig};

const ACTIVE_EPS_CAP: f64 = 1e-3;

pub(crate) fn run(problem: &Problem<'_>, cfg: &SolveConfig, u: &mut Vec<f64>) -> RunOutcome {
    let n = u.len();
    let mut energy = problem.op.energy(u);
    let mut history = vec![energy];
    let mut iterations = 0;
    let mut linear_iterations = 0;
    let mut failure = None;
    while iterations < cfg.max_iterations {
        let grad = problem.masked_gradient(u);
        if problem.kkt(u, &grad).within(problem.tol) {
            break;
        }
        let eps = ACTIVE_EPS_CAP.min(problem.projected_gradient_norm(u, &grad));
        let active: Vec<bool> = (0..n).map(|i| problem.is_thin(i) && u[i] <= eps && grad[i] > 0.0).collect();
        let mask: Vec<bool> = (0..n).map(|i| problem.is_free(i) && !active[i]).collect();

        let lin = problem.op.linearize(u);
        let diag = problem.op.hessian_diagonal(&lin, n);
        let rhs: Vec<f64> = (0..n).map(|i| if mask[i] { -grad[i] } else { 0.0 }).collect();
        let mut d = vec![0.0; n];
        let free_count = mask.iter().filter(|m| **m).count();
        let out = pcg(
            |v, o| problem.op.hessian_apply(&lin, v, o),
            &diag,
            &mask,
            &rhs,
            &mut d,
            cfg.linear_tol,
            1e-3 * problem.tol,
            (10 * free_count).max(100),
        );
        linear_iterations += out.iterations;
        for i in 0..n {
            if active[i] {
                d[i] = -grad[i] / diag[i].max(f64::MIN_POSITIVE);
            }
        }

        let step = if out.breakdown { None } else { arc_search(problem, cfg, u, &d, &grad, energy) };
        let step = step.or_else(|| {
            let lambda = 1.0 / diag.iter().fold(0.0f64, |m, x| m.max(*x)).max(f64::MIN_POSITIVE);
            pg_step(problem, cfg, u, &grad, energy, lambda)
        });
        match step {
            Some(e) => energy = e,
            None => {
                failure = Some(format!("no descent step at iteration {iterations}"));
                break;
            }
        }
        iterations += 1;
        history.push(energy);
    }
    RunOutcome { iterations, linear_iterations, energy_history: history, failure }
}

fn arc_search(problem: &Problem<'_>, cfg: &SolveConfig, u: &mut Vec<f64>, d: &[f64], grad: &[f64], energy: f64) -> Option<f64> {
    let point = |t: f64| {
        let mut x: Vec<f64> = u.iter().zip(d).map(|(a, b)| a + t * b).collect();
        problem.project(&mut x);
        x
    };
    let mut t = 1.0;
    for _ in 0..40 {
        let cand = point(t);
        let slope: f64 = cand.iter().zip(u.iter()).zip(grad).map(|((c, x), g)| (c - x) * g).sum();
        if slope >= 0.0 {
            break;
        }
        let e = problem.op.energy(&cand);
        if e <= energy + cfg.armijo * slope {
            *u = cand;
            return Some(e);
        }
        t *= 0.5;
    }
    roundoff_accept(problem, u, point(1.0), grad, energy)
}
