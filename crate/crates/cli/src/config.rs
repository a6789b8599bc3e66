//! Experiment configuration: one JSON file per run.
//!
//! Three keys are shared by every subcommand (`seed`, `output_dir`,
//! `tolerances`); everything else belongs to the subcommand payload and is
//! rejected if unknown.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Parsed envelope plus the still-untyped payload.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
    pub payload: Value,
    /// SHA-256 of the canonical (key-sorted, compact) JSON of the whole file.
    pub sha256: String,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config is not valid JSON: {e}")))?;
        let sha256 = canonical_hash(&value);
        let Value::Object(mut map) = value else {
            return Err(CliError::Validation("config must be a JSON object".into()));
        };
        let seed = match map.remove("seed") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64().ok_or_else(|| CliError::Validation("seed must be a non-negative integer".into()))?,
            ),
        };
        let output_dir = match map.remove("output_dir") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(CliError::Validation("output_dir must be a string".into())),
        };
        let tolerances = match map.remove("tolerances") {
            None | Some(Value::Null) => BTreeMap::new(),
            Some(v) => serde_json::from_value(v)
                .map_err(|e| CliError::Validation(format!("tolerances must map names to numbers: {e}")))?,
        };
        Ok(Self { seed, output_dir, tolerances, payload: Value::Object(map), sha256 })
    }

    pub fn payload<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        T::deserialize(&self.payload).map_err(|e| CliError::Validation(format!("invalid config: {e}")))
    }

    /// Merge overrides into `defaults`, rejecting names the subcommand does not use.
    pub fn resolve_tolerances(&self, defaults: &[(&'static str, f64)]) -> Result<Tolerances, CliError> {
        let mut values: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (name, value) in &self.tolerances {
            let slot = values.get_mut(name).ok_or_else(|| {
                let known: Vec<&str> = defaults.iter().map(|(k, _)| *k).collect();
                CliError::Validation(format!("unknown tolerance {name:?}; expected one of {known:?}"))
            })?;
            if !(value.is_finite() && *value > 0.0) {
                return Err(CliError::Validation(format!("tolerance {name:?} must be positive, got {value}")));
            }
            *slot = *value;
        }
        Ok(Tolerances(values))
    }
}

/// Resolved tolerance table for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(&self.0).expect("string-keyed map of floats")
    }
}

fn canonical_hash(value: &Value) -> String {
    // serde_json's default map is a BTreeMap, so keys serialize sorted.
    let canonical = serde_json::to_string(value).expect("JSON value re-serializes");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

/// `[m_max, n_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct TruncationPair(pub usize, pub usize);

/// Weight exponents (δ, δ₀, α).
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub delta: f64,
    pub delta0: f64,
    pub alpha: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { delta: 0.5, delta0: 0.5, alpha: 0.5 }
    }
}

/// A named family with free-form numeric parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Named {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl Named {
    /// Read parameters, rejecting any not in `allowed`.
    pub fn params(&self, allowed: &[(&str, f64)]) -> Result<BTreeMap<String, f64>, CliError> {
        let mut out: BTreeMap<String, f64> = allowed.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in &self.params {
            match out.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    return Err(CliError::Validation(format!("{}: unknown parameter {k:?}", self.name)));
                }
            }
        }
        Ok(out)
    }
}

/// Integer-valued parameter stored as a float in `params`.
pub fn as_count(name: &str, value: f64) -> Result<usize, CliError> {
    if value >= 0.0 && value.fract() == 0.0 && value < 1e9 {
        Ok(value as usize)
    } else {
        Err(CliError::Validation(format!("{name} must be a non-negative integer, got {value}")))
    }
}
