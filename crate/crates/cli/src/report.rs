//! Report envelope, tagged numbers and deterministic hashing.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Keys whose values depend on wall-clock time.
pub const VOLATILE_KEYS: [&str; 3] = ["started_at", "finished_at", "timings"];

/// A reported number with either an error estimate or an exactness tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Self { value, error: None, exact: true }
    }

    pub fn estimate(value: f64, error: f64) -> Self {
        Self { value, error: Some(error), exact: false }
    }

    /// Counts and flags are exact by construction.
    pub fn count(n: usize) -> Self {
        Self::exact(n as f64)
    }
}

/// A named pass/fail outcome inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), pass }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    /// Wall-clock seconds by step.
    #[serde(default)]
    pub timings: BTreeMap<String, f64>,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub results: Value,
    #[serde(default)]
    pub artifacts: Vec<String>,
}

impl ReportEnvelope {
    /// The report as JSON with time-dependent fields removed.
    pub fn stable_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        strip_volatile(&mut v);
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}

/// Removes [`VOLATILE_KEYS`] at every depth.
pub fn strip_volatile(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for k in VOLATILE_KEYS {
                map.remove(k);
            }
            map.values_mut().for_each(strip_volatile);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_volatile),
        _ => {}
    }
}

/// SHA-256 of the canonical (key-sorted, compact) JSON form.
pub fn canonical_hash<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("config serializes");
    let canonical = serde_json::to_string(&v).expect("value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{ "a": [1,2], "b": 1 }"#).unwrap();
        assert_eq!(canonical_hash(&a), canonical_hash(&b));
    }

    #[test]
    fn volatile_fields_are_stripped_recursively() {
        let mut v: Value = serde_json::from_str(r#"{"started_at": "x", "inner": [{"timings": {}, "k": 1}]}"#).unwrap();
        strip_volatile(&mut v);
        assert_eq!(v, serde_json::json!({"inner": [{"k": 1}]}));
    }

    #[test]
    fn quantity_tags() {
        assert_eq!(serde_json::to_string(&Quantity::exact(1.0)).unwrap(), r#"{"value":1.0,"exact":true}"#);
        assert_eq!(serde_json::to_string(&Quantity::estimate(1.0, 0.5)).unwrap(), r#"{"value":1.0,"error":0.5}"#);
    }
}
