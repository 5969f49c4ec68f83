use serde::{Deserialize, Serialize};

use super::{AnalysisError, FrequencyProfile};

pub const DEFAULT_C_MAX: f64 = 1e3;
const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MonotonicityStatus {
    Monotone,
    NotMonotonizable,
}

/// A consecutive pair of radii where the weighted frequency drops by more
/// than the slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub decrement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub status: MonotonicityStatus,
    /// Smallest `C` in `[0, c_max]` making the weighted frequency
    /// nondecreasing up to `slack`; `None` when no such `C` exists.
    pub fitted_c: Option<f64>,
    pub alpha: f64,
    pub slack: f64,
    pub c_max: f64,
    /// Violations at `fitted_c`, or at `c_max` when not monotonizable.
    pub violations: Vec<Violation>,
    /// `min_k exp(C rho_k^alpha / alpha) N(rho_k)` at the reported `C`.
    pub weighted_min: f64,
}

/// `exp(C rho^alpha / alpha) N`.
pub fn weighted(n: f64, rho: f64, c: f64, alpha: f64) -> f64 {
    (c * rho.powf(alpha) / alpha).exp() * n
}

fn violations(samples: &[(f64, f64)], c: f64, alpha: f64, slack: f64) -> Vec<Violation> {
    samples
        .windows(2)
        .filter_map(|w| {
            let lo = weighted(w[0].1, w[0].0, c, alpha);
            let hi = weighted(w[1].1, w[1].0, c, alpha);
            (lo - hi > slack).then_some(Violation { rho_lo: w[0].0, rho_hi: w[1].0, decrement: lo - hi })
        })
        .collect()
}

/// Smallest `C` such that `rho -> exp(C rho^alpha / alpha) N(rho)` is
/// nondecreasing along the sampled radii within `slack`, by bisection on
/// `[0, c_max]`.
pub fn monotonicity_fit(profile: &FrequencyProfile, alpha: f64, slack: f64, c_max: f64) -> Result<MonotonicityReport, AnalysisError> {
    if profile.rows.len() < 4 {
        return Err(AnalysisError::TooFewRadii { found: profile.rows.len(), needed: 4 });
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(slack >= 0.0) || !(c_max >= 0.0 && c_max.is_finite()) {
        return Err(AnalysisError::InvalidParameter(format!("alpha {alpha}, slack {slack}, c_max {c_max}")));
    }
    let mut samples: Vec<(f64, f64)> = profile.rows.iter().map(|r| (r.rho, r.n)).collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ok = |c: f64| violations(&samples, c, alpha, slack).is_empty();
    let weighted_min = |c: f64| samples.iter().map(|&(r, n)| weighted(n, r, c, alpha)).fold(f64::INFINITY, f64::min);

    if !ok(c_max) {
        return Ok(MonotonicityReport {
            status: MonotonicityStatus::NotMonotonizable,
            fitted_c: None,
            alpha,
            slack,
            c_max,
            violations: violations(&samples, c_max, alpha, slack),
            weighted_min: weighted_min(c_max),
        });
    }
    let c = if ok(0.0) {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, c_max);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(MonotonicityReport {
        status: MonotonicityStatus::Monotone,
        fitted_c: Some(c),
        alpha,
        slack,
        c_max,
        violations: Vec::new(),
        weighted_min: weighted_min(c),
    })
}
