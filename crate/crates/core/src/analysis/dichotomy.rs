use serde::{Deserialize, Serialize};

use crate::geometry::{FieldSampler, HemisphereRule};

use super::{l2_average, AnalysisError};

/// Relative slack in the comparisons, absorbing quadrature roundoff.
const COMPARE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRow {
    pub rho: f64,
    /// `||u||_{rho/2} / ||u||_{rho/4}`.
    pub ratio: f64,
    /// `ratio >= 2^{3/2 + delta}`.
    pub triggered: bool,
    /// `sigma` values where the conclusion fails (only when triggered).
    pub failed_sigmas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub delta: f64,
    pub rows: Vec<DichotomyRow>,
    pub violations: usize,
}

/// For each radius, tests whether the dyadic growth of `||u||` beats
/// `2^{3/2+delta}` and, if so, whether
/// `||u||_sigma >= (2 sigma / rho)^{3/2+delta} ||u||_{rho/2}` holds for
/// `sigma in {3 rho/4, 7 rho/8, rho}`.
pub fn dichotomy_scan(
    u: &dyn FieldSampler,
    rule: &HemisphereRule,
    center: &[f64],
    delta: f64,
    radii: &[f64],
) -> Result<DichotomyReport, AnalysisError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(AnalysisError::InvalidParameter(format!("delta = {delta} outside (0, 1/2)")));
    }
    let exponent = 1.5 + delta;
    let mut rows = Vec::with_capacity(radii.len());
    for &rho in radii {
        let half = l2_average(u, rule, center, 0.5 * rho)?;
        let quarter = l2_average(u, rule, center, 0.25 * rho)?;
        let ratio = if quarter > 0.0 { half / quarter } else { f64::NAN };
        let triggered = ratio >= 2f64.powf(exponent) * (1.0 - COMPARE_SLACK);
        let mut failed_sigmas = Vec::new();
        if triggered {
            for sigma in [0.75 * rho, 0.875 * rho, rho] {
                let lhs = l2_average(u, rule, center, sigma)?;
                let rhs = (2.0 * sigma / rho).powf(exponent) * half;
                if lhs < rhs * (1.0 - COMPARE_SLACK) {
                    failed_sigmas.push(sigma);
                }
            }
        }
        rows.push(DichotomyRow { rho, ratio, triggered, failed_sigmas });
    }
    let violations = rows.iter().filter(|r| !r.failed_sigmas.is_empty()).count();
    Ok(DichotomyReport { delta, rows, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::radius_ladder;
    use crate::geometry::AnalyticField;
    use crate::oracles::ExactSignoriniSolution;

    fn scan(f: &dyn FieldSampler) -> DichotomyReport {
        let rule = HemisphereRule::default_for(2).unwrap();
        dichotomy_scan(f, &rule, &[0.0; 3], 0.1, &radius_ladder(0.05, 0.4).unwrap()).unwrap()
    }

    #[test]
    fn oracle_never_triggers() {
        let s = ExactSignoriniSolution::planar(1.0).unwrap();
        let rep = scan(&AnalyticField::new(2, |x: &[f64]| s.value(x), |x: &[f64]| s.gradient(x)));
        assert!(rep.rows.iter().all(|r| !r.triggered));
        assert!(rep.rows.iter().all(|r| (r.ratio - 2f64.powf(1.5)).abs() < 1e-10));
    }

    #[test]
    fn faster_power_triggers_and_holds() {
        let f = AnalyticField::new(2, |x: &[f64]| (x[0] * x[0] + x[1] * x[1]).powf(0.9), |_: &[f64]| [0.0; 3]);
        let rep = scan(&f);
        assert!(rep.rows.iter().all(|r| r.triggered));
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn constant_never_triggers() {
        let rep = scan(&AnalyticField::new(2, |_: &[f64]| 1.0, |_: &[f64]| [0.0; 3]));
        assert!(rep.rows.iter().all(|r| !r.triggered && (r.ratio - 1.0).abs() < 1e-12));
    }

    #[test]
    fn slower_growth_after_burst_is_reported() {
        // r^2 near the center but flat beyond 0.1: the hypothesis fires at
        // small radii and the conclusion must fail where the growth stops
        let f = AnalyticField::new(
            2,
            |x: &[f64]| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                r.min(0.1).powi(2)
            },
            |_: &[f64]| [0.0; 3],
        );
        let rule = HemisphereRule::default_for(2).unwrap();
        let rep = dichotomy_scan(&f, &rule, &[0.0; 3], 0.1, &[0.2, 0.4]).unwrap();
        assert!(rep.rows[0].triggered);
        assert!(rep.violations >= 1);
    }
}
