use serde::{Deserialize, Serialize};

use crate::geometry::{FieldSampler, HemisphereRule};

use super::AnalysisError;

/// Largest allowed spread `max / min` of a ratio family before it counts as
/// growing.
const BOUNDED_SPREAD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityRow {
    pub rho: f64,
    /// `int u^2 / (rho^2 int |grad u|^2)` over `B_rho^+`.
    pub poincare: f64,
    /// `rho int_{dB_rho^+} u^2 / int_{B_rho^+} u^2`.
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityReport {
    pub rows: Vec<SanityRow>,
    pub dropped: Vec<f64>,
    pub poincare_spread: f64,
    pub trace_spread: f64,
    /// Neither family spreads by more than a factor 10 across the ladder.
    pub bounded: bool,
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = v.fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

pub fn sanity_inequalities(
    u: &dyn FieldSampler,
    rule: &HemisphereRule,
    center: &[f64],
    radii: &[f64],
) -> Result<SanityReport, AnalysisError> {
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for &rho in radii {
        let q = rule.at(center, rho)?;
        let mass = q.volume_integral(|x| u.value(x).map(|v| v * v))?;
        let energy = q.volume_integral(|x| u.gradient(x).map(|g| g[0] * g[0] + g[1] * g[1] + g[2] * g[2]))?;
        let boundary = q.surface_integral(|x| u.value(x).map(|v| v * v))?;
        if !(mass > 0.0) || !(energy > 0.0) {
            dropped.push(rho);
            continue;
        }
        rows.push(SanityRow { rho, poincare: mass / (rho * rho * energy), trace: rho * boundary / mass });
    }
    let poincare_spread = spread(rows.iter().map(|r| r.poincare));
    let trace_spread = spread(rows.iter().map(|r| r.trace));
    let bounded = !rows.is_empty() && poincare_spread <= BOUNDED_SPREAD && trace_spread <= BOUNDED_SPREAD;
    Ok(SanityReport { rows, dropped, poincare_spread, trace_spread, bounded })
}
