use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thetalab::siegel::TruncationPolicy;

use crate::CliError;

/// One residual or consistency compared against its threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `below`: pass when `value < threshold`; `above` for negative controls.
    pub relation: &'static str,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, relation: "below", pass: value < threshold }
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, relation: "above", pass: value > threshold }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub policy: TruncationPolicy,
    /// Library operations invoked by the subcommand.
    pub operations: Vec<&'static str>,
    pub checks: Vec<Check>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Pass/fail thresholds. Defaults match the acceptance tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub addition: f64,
    pub modular_spread: f64,
    pub prym: f64,
    pub secant_consistency: f64,
    pub secant_negative: f64,
    pub sine_gordon: f64,
    pub hirota_exact: f64,
    pub hirota_theta: f64,
    pub effectivization_kdv: f64,
    pub effectivization: f64,
    pub pde_kdv: f64,
    pub pde_kp: f64,
    pub pde_vn: f64,
    pub pde_sine_gordon: f64,
    pub theta_relations: f64,
    pub quadrature: f64,
    pub period_symmetry: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            addition: 1e-9,
            modular_spread: 1e-9,
            prym: 1e-9,
            secant_consistency: 1e-6,
            secant_negative: 1e-2,
            sine_gordon: 1e-6,
            hirota_exact: 1e-12,
            hirota_theta: 1e-8,
            effectivization_kdv: 1e-10,
            effectivization: 1e-8,
            pde_kdv: 1e-8,
            pde_kp: 1e-6,
            pde_vn: 1e-8,
            pde_sine_gordon: 1e-6,
            theta_relations: 1e-7,
            quadrature: 1e-8,
            period_symmetry: 1e-8,
        }
    }
}

impl Thresholds {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
