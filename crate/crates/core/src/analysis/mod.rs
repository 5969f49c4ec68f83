//! Measurements on a solution: frequency, doubling, weighted monotonicity,
//! contact set, blow-ups, decay rates, dichotomy scan, reflections and
//! Poincare/trace ratios.

mod blowup;
mod contact;
mod decay;
mod dichotomy;
mod frequency;
mod monotonicity;
mod sanity;
mod symmetrize;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use blowup::{blowup, BlowupOptions, BlowupReference, BlowupResult, BlowupStage, ReferenceDistance};
pub use contact::{extract_contact_set, CenterRule, EdgeCrossing, FaceCell, FreeBoundarySet};
pub use decay::{decay_fit, fit_power_law, sup_norms, DecayFit, DecayNorm};
pub use dichotomy::{dichotomy_scan, DichotomyReport, DichotomyRow};
pub use frequency::{
    compute_d, compute_h, compute_n, frequency_profile, l2_average, FrequencyProfile, FrequencyRow,
    DEGENERATE_H,
};
pub use monotonicity::{monotonicity_fit, MonotonicityReport, MonotonicityStatus, Violation, DEFAULT_C_MAX};
pub use sanity::{sanity_inequalities, SanityReport, SanityRow};
pub use symmetrize::{symmetrize_and_check, Parity, SymmetrizationReport};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("degenerate scale at rho = {rho:.4e}: {what} = {value:.3e}")]
    DegenerateScale { rho: f64, what: &'static str, value: f64 },
    #[error("only {found} radii survive, need at least {needed}")]
    TooFewRadii { found: usize, needed: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated at thin nodes {nodes:?}: {reason}")]
    Precondition { reason: String, nodes: Vec<usize> },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Geometric radii from `rho_max` down to `rho_min` with ratio `2^{-1/4}`,
/// largest first. `rho_min` is included when it falls on the ladder up to
/// rounding.
pub fn radius_ladder(rho_min: f64, rho_max: f64) -> Result<Vec<f64>, AnalysisError> {
    if !(rho_min > 0.0 && rho_min <= rho_max && rho_max.is_finite()) {
        return Err(AnalysisError::InvalidParameter(format!("radius range [{rho_min}, {rho_max}]")));
    }
    let ratio = 2f64.powf(-0.25);
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let r = rho_max * ratio.powi(k);
        if r < rho_min * (1.0 - 1e-12) {
            break;
        }
        out.push(r);
        k += 1;
    }
    Ok(out)
}

/// Default ladder `[4 h, 0.45]` for a grid of spacing `h`.
pub fn default_ladder(spacing: f64) -> Result<Vec<f64>, AnalysisError> {
    radius_ladder(4.0 * spacing, 0.45)
}

/// Radii below `8 h` are resolved by too few cells to be trusted.
pub fn is_untrusted(rho: f64, spacing: Option<f64>) -> bool {
    spacing.is_some_and(|h| rho < 8.0 * h)
}
