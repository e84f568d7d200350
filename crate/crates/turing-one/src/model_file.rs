//! The JSON model description:
//!
//! ```json
//! { "A": [[-1.0, 2.0], [0.5, -3.0]], "diffuser_index": 1, "mu": 1e-3, "L": 1.0,
//!   "k_max": 200, "lambda_policy": "discrete" }
//! ```
//!
//! `diffuser_index` is 0-based; `k_max` and `lambda_policy` are optional.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use turing_one_core::grayscott::{Branch, GsParams};
use turing_one_core::model::{LambdaPolicy, LinearSystem, SpatialSpec};
use turing_one_core::numerics::Matrix;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Discrete,
    Continuous,
}

impl From<PolicyName> for LambdaPolicy {
    fn from(p: PolicyName) -> Self {
        match p {
            PolicyName::Discrete => LambdaPolicy::Discrete,
            PolicyName::Continuous => LambdaPolicy::Continuous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub diffuser_index: usize,
    pub mu: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_policy: Option<PolicyName>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpatialOverrides {
    pub mu: Option<f64>,
    pub length: Option<f64>,
    pub k_max: Option<usize>,
    pub policy: Option<PolicyName>,
}

impl ModelFile {
    /// Parses and validates; errors name the line/column or the field.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let model: ModelFile = serde_json::from_str(text)
            .map_err(|e| CliError::input(format!("model JSON, line {} column {}: {e}", e.line(), e.column())))?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), CliError> {
        let n = self.a.len();
        if n < 2 {
            return Err(CliError::input(format!("field `A`: need at least 2 rows, got {n}")));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != n {
                return Err(CliError::input(format!(
                    "field `A`: row {i} has {} entries, expected {n} (matrix must be square)",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(CliError::input(format!("field `A`: entry ({i}, {j}) is not finite")));
            }
        }
        if self.diffuser_index >= n {
            return Err(CliError::input(format!(
                "field `diffuser_index`: {} out of range for {n} species",
                self.diffuser_index
            )));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(CliError::input("field `mu`: must be finite and >= 0"));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(CliError::input("field `L`: must be finite and > 0"));
        }
        Ok(())
    }

    /// The system with the diffuser moved to the last position.
    pub fn system(&self) -> Result<LinearSystem, CliError> {
        let m = Matrix::from_rows(&self.a).map_err(|e| CliError::input(format!("field `A`: {e}")))?;
        LinearSystem::with_diffuser(m, self.diffuser_index).map_err(|e| CliError::input(format!("field `A`: {e}")))
    }

    pub fn spatial(&self, o: &SpatialOverrides) -> Result<SpatialSpec, CliError> {
        let policy = o.policy.or(self.lambda_policy).unwrap_or(PolicyName::Discrete);
        SpatialSpec::new(
            o.mu.unwrap_or(self.mu),
            o.length.unwrap_or(self.length),
            o.k_max.or(self.k_max).unwrap_or(SpatialSpec::DEFAULT_K_MAX),
            policy.into(),
        )
        .map_err(CliError::from)
    }

    /// Linearization of a Gray-Scott equilibrium with `Z` diffusing.
    pub fn from_grayscott(p: &GsParams, branch: Branch, length: f64) -> Result<Self, CliError> {
        let eq = p
            .equilibrium(branch)
            .ok_or_else(|| CliError::input(format!("no {} equilibrium at these parameters", branch.as_str())))?;
        let j = p.jacobian_at(&eq);
        Ok(Self {
            a: (0..3).map(|i| j.row(i).to_vec()).collect(),
            diffuser_index: 2,
            mu: p.mu,
            length,
            k_max: None,
            lambda_policy: None,
        })
    }
}

/// A named Gray-Scott parameter set.
pub fn preset(name: &str) -> Option<GsParams> {
    match name {
        "grayscott:A" | "grayscott:a" => Some(GsParams::preset_a()),
        "grayscott:B" | "grayscott:b" => Some(GsParams::preset_b()),
        _ => None,
    }
}

/// Where a model came from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    File { model: ModelFile },
    Preset { name: String, params: GsParams },
}

/// A loaded model plus the SHA-256 of its source bytes (or preset name).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    pub source: ModelSource,
    pub digest: String,
}

impl LoadedModel {
    /// Linear model: the file itself, or the Plus-branch linearization of a
    /// preset.
    pub fn model_file(&self, branch: Branch) -> Result<ModelFile, CliError> {
        match &self.source {
            ModelSource::File { model } => Ok(model.clone()),
            ModelSource::Preset { params, .. } => ModelFile::from_grayscott(params, branch, 1.0),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads `arg` as a preset name (`grayscott:A`, `grayscott:B`) or a path.
pub fn load(arg: &str) -> Result<LoadedModel, CliError> {
    if let Some(params) = preset(arg) {
        return Ok(LoadedModel {
            source: ModelSource::Preset {
                name: arg.to_string(),
                params,
            },
            digest: sha256_hex(arg.as_bytes()),
        });
    }
    if arg.starts_with("grayscott:") {
        return Err(CliError::input(format!(
            "unknown preset `{arg}` (known: grayscott:A, grayscott:B)"
        )));
    }
    let bytes = std::fs::read(arg).map_err(|e| CliError::input(format!("{arg}: {e}")))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::input(format!("{arg}: not UTF-8")))?;
    let model = ModelFile::parse(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{arg}: {msg}")),
        other => other,
    })?;
    Ok(LoadedModel {
        source: ModelSource::File { model },
        digest: sha256_hex(&bytes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal() {
        let m = ModelFile::parse(r#"{"A": [[-1, 0], [0, -2]], "diffuser_index": 0, "mu": 0.5, "L": 2}"#).unwrap();
        assert_eq!(m.k_max, None);
        let sys = m.system().unwrap();
        assert_eq!(sys.matrix()[(1, 1)], -1.0);
        let spec = m
            .spatial(&SpatialOverrides {
                mu: Some(0.1),
                ..Default::default()
            })
            .unwrap();
        assert_eq!((spec.mu, spec.length, spec.k_max), (0.1, 2.0, 200));
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = |t: &str| match ModelFile::parse(t) {
            Err(CliError::Input(msg)) => msg,
            other => panic!("{other:?}"),
        };
        assert!(err(r#"{"A": [[1, 2, 3], [4, 5, 6]], "diffuser_index": 0, "mu": 1, "L": 1}"#).contains("row 0"));
        assert!(err(r#"{"A": [[1, 2], [4, 5]], "diffuser_index": 2, "mu": 1, "L": 1}"#).contains("diffuser_index"));
        assert!(err(r#"{"A": [[1, 2], [4, 5]], "diffuser_index": 0, "mu": -1, "L": 1}"#).contains("`mu`"));
        assert!(err("{\n\"A\": [[1, 2], [4, 5]],\n oops }").contains("line 3"));
        assert!(
            err(r#"{"A": [[1, 2], [4, 5]], "diffuser_index": 0, "mu": 1, "L": 1, "x": 0}"#).contains("unknown field")
        );
    }

    #[test]
    fn presets() {
        let m = load("grayscott:A").unwrap();
        let file = m.model_file(Branch::Plus).unwrap();
        assert_eq!(file.diffuser_index, 2);
        assert_eq!(file.mu, 1e-3);
        assert!(load("grayscott:C").is_err());
    }
}
