use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{FieldSampler, HemisphereRule, Point};
use crate::nonlinearity::NonlinearityModel;

use super::{is_untrusted, AnalysisError};

/// Boundary mass below which a radius is dropped.
pub const DEGENERATE_H: f64 = 1e-14;
const MIN_RADII: usize = 4;

fn norm(g: &Point) -> f64 {
    (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
}

/// `rho^{2-n} int_{B_rho^+} flux(grad u) . grad u`.
pub fn compute_d(
    u: &dyn FieldSampler,
    model: &NonlinearityModel,
    rule: &HemisphereRule,
    center: &[f64],
    rho: f64,
) -> Result<f64, AnalysisError> {
    let q = rule.at(center, rho)?;
    // flux(p) . p = h'(|p|) |p|
    let integral = q.volume_integral(|x| {
        let t = norm(&u.gradient(x)?);
        Ok::<_, AnalysisError>(model.h1(t) * t)
    })?;
    Ok(rho.powi(2 - u.dim() as i32) * integral)
}

/// `rho^{1-n} int_{(dB_rho)^+} u^2`.
pub fn compute_h(u: &dyn FieldSampler, rule: &HemisphereRule, center: &[f64], rho: f64) -> Result<f64, AnalysisError> {
    let q = rule.at(center, rho)?;
    let integral = q.surface_integral(|x| {
        let v = u.value(x)?;
        Ok::<_, AnalysisError>(v * v)
    })?;
    Ok(rho.powi(1 - u.dim() as i32) * integral)
}

/// `D / H`, or `DegenerateScale` when `H < 1e-14`.
pub fn compute_n(
    u: &dyn FieldSampler,
    model: &NonlinearityModel,
    rule: &HemisphereRule,
    center: &[f64],
    rho: f64,
) -> Result<f64, AnalysisError> {
    let h = compute_h(u, rule, center, rho)?;
    if h < DEGENERATE_H {
        return Err(AnalysisError::DegenerateScale { rho, what: "H", value: h });
    }
    Ok(compute_d(u, model, rule, center, rho)? / h)
}

/// Averaged norm `(rho^{-n} int_{B_rho^+} u^2)^{1/2}`.
pub fn l2_average(u: &dyn FieldSampler, rule: &HemisphereRule, center: &[f64], rho: f64) -> Result<f64, AnalysisError> {
    let q = rule.at(center, rho)?;
    let integral = q.volume_integral(|x| {
        let v = u.value(x)?;
        Ok::<_, AnalysisError>(v * v)
    })?;
    Ok((rho.powi(-(u.dim() as i32)) * integral).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub rho: f64,
    pub d: f64,
    pub h: f64,
    pub n: f64,
    pub l2_norm: f64,
    /// `||u||_rho / ||u||_{rho/2}`.
    pub doubling: f64,
    pub untrusted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProfile {
    pub center: Vec<f64>,
    /// Retained radii in the order requested.
    pub rows: Vec<FrequencyRow>,
    /// Radii dropped as degenerate.
    pub dropped: Vec<f64>,
    /// Largest doubling ratio.
    pub gamma: f64,
    pub n_min: f64,
    pub n_max: f64,
}

impl FrequencyProfile {
    pub fn radii(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rho).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.n).collect()
    }
}

pub fn frequency_profile(
    u: &dyn FieldSampler,
    model: &NonlinearityModel,
    rule: &HemisphereRule,
    center: &[f64],
    radii: &[f64],
) -> Result<FrequencyProfile, AnalysisError> {
    let spacing = u.spacing();
    let rows: Vec<Result<Option<FrequencyRow>, AnalysisError>> = radii
        .par_iter()
        .map(|&rho| {
            let h = compute_h(u, rule, center, rho)?;
            let l2 = l2_average(u, rule, center, rho)?;
            let l2_half = l2_average(u, rule, center, 0.5 * rho)?;
            if h < DEGENERATE_H || !(l2_half > 0.0) {
                return Ok(None);
            }
            let d = compute_d(u, model, rule, center, rho)?;
            Ok(Some(FrequencyRow {
                rho,
                d,
                h,
                n: d / h,
                l2_norm: l2,
                doubling: l2 / l2_half,
                untrusted: is_untrusted(rho, spacing),
            }))
        })
        .collect();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (row, &rho) in rows.into_iter().zip(radii) {
        match row? {
            Some(r) => kept.push(r),
            None => dropped.push(rho),
        }
    }
    if kept.len() < MIN_RADII {
        return Err(AnalysisError::TooFewRadii { found: kept.len(), needed: MIN_RADII });
    }
    let gamma = kept.iter().map(|r| r.doubling).fold(f64::NEG_INFINITY, f64::max);
    let n_min = kept.iter().map(|r| r.n).fold(f64::INFINITY, f64::min);
    let n_max = kept.iter().map(|r| r.n).fold(f64::NEG_INFINITY, f64::max);
    Ok(FrequencyProfile { center: center[..u.dim()].to_vec(), rows: kept, dropped, gamma, n_min, n_max })
}
