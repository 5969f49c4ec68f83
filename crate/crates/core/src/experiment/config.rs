use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::CenterRule;
use crate::nonlinearity::NonlinearitySpec;
use crate::solver::{BoundarySpec, SolveConfig};

use super::ExperimentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub nodes_per_axis: Vec<usize>,
    pub nonlinearity: NonlinearitySpec,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Seeds the structure probes of the nonlinearity check.
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Requested point on the thin plane; the free-boundary point nearest to
    /// it becomes the analysis center.
    #[serde(default = "default_center")]
    pub center: Vec<f64>,
    #[serde(default = "default_rho_min")]
    pub rho_min: f64,
    #[serde(default = "default_rho_max")]
    pub rho_max: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_c_max")]
    pub c_max: f64,
    #[serde(default = "default_center_rule")]
    pub center_rule: CenterRule,
    /// Contact threshold; ten times the solver tolerance when absent.
    #[serde(default)]
    pub epsilon_contact: Option<f64>,
    #[serde(default = "default_true")]
    pub blowup: bool,
}

fn default_center() -> Vec<f64> {
    vec![0.0, 0.0]
}
fn default_rho_min() -> f64 {
    0.05
}
fn default_rho_max() -> f64 {
    0.4
}
fn default_alpha() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.1
}
fn default_slack() -> f64 {
    1e-3
}
fn default_c_max() -> f64 {
    crate::analysis::DEFAULT_C_MAX
}
fn default_center_rule() -> CenterRule {
    CenterRule::EdgeCrossing
}
fn default_true() -> bool {
    true
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            center: default_center(),
            rho_min: default_rho_min(),
            rho_max: default_rho_max(),
            alpha: default_alpha(),
            delta: default_delta(),
            slack: default_slack(),
            c_max: default_c_max(),
            center_rule: default_center_rule(),
            epsilon_contact: None,
            blowup: true,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ExperimentError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ExperimentError::Config(format!("malformed document: {e}")))?;
        let config: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                ExperimentError::Config(inner.to_string())
            } else {
                ExperimentError::Config(format!("{path}: {inner}"))
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Digest of the canonical form with defaults filled in. The output
    /// directory is left out: it says where results go, not what they are.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        digest_value(&value)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if !(self.dim == 2 || self.dim == 3) {
            return bad(format!("dim: must be 2 or 3, got {}", self.dim));
        }
        if self.nodes_per_axis.len() != self.dim {
            return bad(format!("nodes_per_axis: expected {} entries, got {}", self.dim, self.nodes_per_axis.len()));
        }
        let a = &self.analysis;
        if a.center.len() != self.dim - 1 && a.center.len() != self.dim {
            return bad(format!("analysis.center: expected {} coordinates", self.dim - 1));
        }
        if a.center.len() == self.dim && a.center[self.dim - 1] != 0.0 {
            return bad("analysis.center: must lie on the thin plane".into());
        }
        if !(a.rho_min > 0.0 && a.rho_min <= a.rho_max && a.rho_max < 1.0) {
            return bad(format!("analysis.rho_min/rho_max: need 0 < rho_min <= rho_max < 1, got [{}, {}]", a.rho_min, a.rho_max));
        }
        if !(a.alpha > 0.0 && a.alpha <= 1.0) {
            return bad(format!("analysis.alpha: must lie in (0, 1], got {}", a.alpha));
        }
        if !(a.delta > 0.0 && a.delta < 0.5) {
            return bad(format!("analysis.delta: must lie in (0, 1/2), got {}", a.delta));
        }
        if !(a.slack >= 0.0) || !(a.c_max > 0.0) {
            return bad("analysis.slack/c_max: slack >= 0 and c_max > 0 required".into());
        }
        if let Some(e) = a.epsilon_contact {
            if !(e > 0.0) {
                return bad(format!("analysis.epsilon_contact: must be positive, got {e}"));
            }
        }
        Ok(())
    }

    /// Center request padded to a point.
    pub fn requested_center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        c[..self.dim - 1].copy_from_slice(&self.analysis.center[..self.dim - 1]);
        c
    }
}

/// SHA-256 over the compact serialization with object keys sorted, so
/// whitespace and key order do not change the digest.
pub fn digest_value(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    let hash = Sha256::digest(&bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "dim": 2,
        "nodes_per_axis": [33, 17],
        "nonlinearity": {"name": "quadratic"},
        "boundary": {"generator": "oracle_trace", "amplitude": 1.0}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.analysis, AnalysisSpec::default());
        assert_eq!(c.solver, SolveConfig::default());
        assert_eq!(c.output, PathBuf::from("out"));
    }

    #[test]
    fn missing_dim_is_named() {
        let err = RunConfig::from_json(r#"{"nodes_per_axis": [5, 3], "nonlinearity": {"name": "quadratic"},
            "boundary": {"generator": "constant", "value": 1.0}}"#)
        .unwrap_err();
        assert!(err.to_string().contains("`dim`"), "{err}");
    }

    #[test]
    fn nested_errors_carry_their_path() {
        let text = BASE.replace(r#""amplitude": 1.0"#, r#""amplitude": "one""#);
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("boundary"), "{err}");
        let text = BASE.replace(r#""quadratic""#, r#""cubic""#);
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("nonlinearity"), "{err}");
        let text = BASE.replace("}\n    }", "},\n \"solver\": {\"tol\": 1}}");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("solver") && err.contains("tol"), "{err}");
    }

    #[test]
    fn digest_ignores_layout_only() {
        let a = RunConfig::from_json(BASE).unwrap().digest();
        let reordered = r#"{"boundary":{"amplitude":1.0,"generator":"oracle_trace"},"dim":2,
            "nonlinearity":{"name":"quadratic"},"nodes_per_axis":[33,17]}"#;
        assert_eq!(a, RunConfig::from_json(reordered).unwrap().digest());
        let explicit = BASE.replace("1.0}", r#"1.0, "extrusion_axis": 1}, "seed": 0"#);
        assert_eq!(a, RunConfig::from_json(&explicit).unwrap().digest());
        let moved = BASE.replace("1.0}", r#"1.0}, "output": "elsewhere""#);
        assert_eq!(a, RunConfig::from_json(&moved).unwrap().digest());
        for changed in [BASE.replace("33", "65"), BASE.replace("1.0}", r#"1.0}, "seed": 1"#)] {
            assert_ne!(a, RunConfig::from_json(&changed).unwrap().digest());
        }
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn semantic_checks() {
        for (from, to) in [("\"dim\": 2", "\"dim\": 4"), ("[33, 17]", "[33, 17, 9]")] {
            assert!(RunConfig::from_json(&BASE.replace(from, to)).is_err());
        }
        let c = RunConfig::from_json(BASE).unwrap();
        let round = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(round, c);
    }
}
