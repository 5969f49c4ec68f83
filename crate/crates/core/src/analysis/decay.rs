use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{FieldSampler, HemisphereRule};

use super::{l2_average, AnalysisError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayNorm {
    /// `||u||_rho`, expected slope 3/2.
    L2Average,
    /// `sup |u|` over the half-ball, expected slope 3/2.
    Sup,
    /// `sup |grad u|` over the half-ball, expected slope 1/2.
    SupGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Least squares `log v = slope log rho + intercept`.
pub fn fit_power_law(radii: &[f64], values: &[f64]) -> Result<DecayFit, AnalysisError> {
    if radii.len() != values.len() || radii.len() < 2 {
        return Err(AnalysisError::InvalidParameter(format!("{} radii, {} values", radii.len(), values.len())));
    }
    if let Some((r, v)) = radii.iter().zip(values).find(|(r, v)| !(**r > 0.0) || !(**v > f64::MIN_POSITIVE)) {
        return Err(AnalysisError::DegenerateScale { rho: *r, what: "sampled norm", value: *v });
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(AnalysisError::InvalidParameter("radii must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(DecayFit { slope, intercept, residual: (ss / m).sqrt() })
}

/// `(sup |u|, sup |grad u|)` over the quadrature points of `B_rho^+` and its
/// curved boundary.
pub fn sup_norms(u: &dyn FieldSampler, rule: &HemisphereRule, center: &[f64], rho: f64) -> Result<(f64, f64), AnalysisError> {
    let q = rule.at(center, rho)?;
    let mut sv: f64 = 0.0;
    let mut sg: f64 = 0.0;
    for (x, _) in q.volume_points().chain(q.surface_points()) {
        sv = sv.max(u.value(&x)?.abs());
        let g = u.gradient(&x)?;
        sg = sg.max((g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt());
    }
    Ok((sv, sg))
}

pub fn decay_fit(
    u: &dyn FieldSampler,
    rule: &HemisphereRule,
    center: &[f64],
    radii: &[f64],
    norm: DecayNorm,
) -> Result<DecayFit, AnalysisError> {
    if radii.len() < 5 {
        return Err(AnalysisError::TooFewRadii { found: radii.len(), needed: 5 });
    }
    let values: Result<Vec<f64>, AnalysisError> = radii
        .par_iter()
        .map(|&rho| match norm {
            DecayNorm::L2Average => l2_average(u, rule, center, rho),
            DecayNorm::Sup => Ok(sup_norms(u, rule, center, rho)?.0),
            DecayNorm::SupGradient => Ok(sup_norms(u, rule, center, rho)?.1),
        })
        .collect();
    fit_power_law(radii, &values?)
}
