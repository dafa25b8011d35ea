//! Run configuration and its schema.

use crate::acceptance::DEFAULT_SEED;
use crate::error::CliError;
use qeilab_core::geometry::{Event, Padding, TorusScenario};
use qeilab_core::scalar::{EvalPath, SamplingFunction, StateKind, Worldline};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Acceptance tolerance overrides keyed `"<id>"` or `"<id>.<name>"`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub formats: Formats,
    pub command: Command,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Formats {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub plot: bool,
}

fn yes() -> bool {
    true
}

impl Default for Formats {
    fn default() -> Self {
        Self { csv: true, plot: true }
    }
}

/// Subcommand tree. `scenario` fields name a scenario file or `demo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "run", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    QeiBound {
        state: StateSpec,
        g: String,
        #[serde(default = "static_worldline")]
        worldline: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<EvalPath>,
    },
    QeiSweep {
        state: StateSpec,
        g: String,
        #[serde(default = "static_worldline")]
        worldline: String,
        parameter: SweepParameter,
        values: Vec<f64>,
    },
    GeomEll {
        points: Vec<Event>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        padding: Option<Padding>,
    },
    GeomKappa {
        mass: f64,
        lmin: f64,
        lmax: f64,
        steps: usize,
    },
    GeomTorusCheck {
        scenario: TorusScenario,
        #[serde(default = "default_gap")]
        gap_tolerance: f64,
    },
    ToyLpe {
        scenario: String,
    },
    ToyCheckProps {
        scenario: String,
    },
    QiSharp {
        scenario: String,
    },
    QiConvert {
        scenario: String,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    QiTriviality {
        scenario: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        world: Option<String>,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default = "default_budget")]
        budget: usize,
    },
    FieldNumrange {
        matrix: MatrixSource,
        #[serde(default = "default_angles")]
        angles: usize,
    },
    FieldSpectrum {
        scenario: String,
    },
    FieldCheckCoSigmaNu {
        scenario: String,
    },
    Acceptance {
        #[serde(default)]
        only: Vec<String>,
    },
}

fn static_worldline() -> String {
    "static".into()
}

fn default_gap() -> f64 {
    1e-6
}

fn default_samples() -> usize {
    16
}

fn default_scale() -> f64 {
    1.0
}

fn default_budget() -> usize {
    64
}

fn default_angles() -> usize {
    720
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub kind: StateName,
    #[serde(default)]
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StateName {
    Vacuum,
    Thermal,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    /// Dilation of the sampling function.
    Width,
    Temperature,
}

/// A matrix given inline, as a Jordan block, or as a scenario component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixSource {
    Jordan { size: usize },
    Inline { rows: Vec<Vec<[f64; 2]>> },
    Scenario { scenario: String, world: String, label: String },
}

impl StateSpec {
    pub fn kind(&self) -> Result<StateKind, CliError> {
        let need = |v: Option<f64>, what: &str| v.ok_or_else(|| CliError::Invalid(format!("{what} is required for this state")));
        Ok(match self.kind {
            StateName::Vacuum => StateKind::vacuum(self.mass),
            StateName::Thermal => StateKind::thermal(need(self.temperature, "temperature")?, self.mass),
            StateName::Torus => StateKind::torus(need(self.length, "length")?, self.mass),
        })
    }
}

/// `family:half_width[@center]` with family `bump` or `cos2`.
pub fn parse_sampling(spec: &str) -> Result<SamplingFunction, CliError> {
    let bad = || CliError::Invalid(format!("sampling function `{spec}` is not of the form bump:W or cos2:W[@C]"));
    let (family, rest) = spec.split_once(':').ok_or_else(bad)?;
    let (w, c) = match rest.split_once('@') {
        Some((w, c)) => (w, Some(c)),
        None => (rest, None),
    };
    let w: f64 = w.trim().parse().map_err(|_| bad())?;
    if !(w > 0.0 && w.is_finite()) {
        return Err(bad());
    }
    let g = match family.trim() {
        "bump" => SamplingFunction::bump(w),
        "cos2" => SamplingFunction::cos2(w),
        _ => return Err(bad()),
    };
    Ok(match c {
        Some(c) => g.with_center(c.trim().parse().map_err(|_| bad())?),
        None => g,
    })
}

/// `static` or `inertial:vx,vy,vz`.
pub fn parse_worldline(spec: &str) -> Result<Worldline, CliError> {
    if spec == "static" {
        return Ok(Worldline::static_origin());
    }
    let bad = || CliError::Invalid(format!("worldline `{spec}` is not `static` or `inertial:vx,vy,vz`"));
    let v = spec.strip_prefix("inertial:").ok_or_else(bad)?;
    let parts: Vec<f64> = v.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [x, y, z] = parts[..] else { return Err(bad()) };
    Ok(Worldline::inertial([x, y, z])?)
}

impl RunConfig {
    pub fn new(seed: u64, command: Command) -> Self {
        Self { schema_version: CONFIG_SCHEMA_VERSION, seed, tolerances: BTreeMap::new(), output_dir: None, formats: Formats::default(), command }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Schema { path: "schema_version".into(), message: format!("expected {CONFIG_SCHEMA_VERSION}, found {}", self.schema_version) });
        }
        for (k, v) in &self.tolerances {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(CliError::Schema { path: format!("tolerances.{k}"), message: format!("tolerance must be positive, found {v}") });
            }
        }
        Ok(())
    }

    /// Hash over everything that affects results; output location and formats are excluded.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Semantic<'a> {
            schema_version: u32,
            seed: u64,
            tolerances: &'a BTreeMap<String, f64>,
            command: &'a Command,
        }
        crate::report::canonical_hash(&Semantic { schema_version: self.schema_version, seed: self.seed, tolerances: &self.tolerances, command: &self.command })
    }

    pub fn command_name(&self) -> String {
        let v = serde_json::to_value(&self.command).expect("command serializes");
        v["run"].as_str().unwrap_or("unknown").to_string()
    }
}

/// Parses a configuration, reporting schema errors with their JSON path.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Schema { path, message: e.into_inner().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    parse_config(&text)
}

/// Reads a JSON file with path-annotated errors.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema { path: format!("{}: {}", path.display(), e.path()), message: e.into_inner().to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_a_schema_error() {
        assert!(matches!(parse_config(""), Err(CliError::Schema { .. })));
        assert!(matches!(parse_config("{}"), Err(CliError::Schema { .. })));
    }

    #[test]
    fn schema_error_carries_path() {
        let text = r#"{"schema_version": 1, "command": {"run": "geom-kappa", "mass": "one", "lmin": 1, "lmax": 2, "steps": 3}}"#;
        // tagged command bodies are buffered, so the path ends at the command

        match parse_config(text) {
            Err(CliError::Schema { path, message }) => {
                assert_eq!(path, "command");
                assert!(message.contains("invalid type"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nested_path_outside_command() {
        match parse_config(r#"{"schema_version": 1, "formats": {"csv": 3}, "command": {"run": "acceptance"}}"#) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "formats.csv"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_tolerance_rejected() {
        let text = r#"{"schema_version": 1, "tolerances": {"1": -1}, "command": {"run": "acceptance"}}"#;
        assert!(matches!(parse_config(text), Err(CliError::Schema { .. })));
    }

    #[test]
    fn hash_ignores_formatting_and_output() {
        let a = parse_config(r#"{"schema_version":1,"seed":3,"command":{"run":"geom-kappa","mass":1,"lmin":1,"lmax":2,"steps":3}}"#).unwrap();
        let b = parse_config(
            r#"{ "command": {"steps": 3, "lmax": 2.0, "lmin": 1.0, "mass": 1.0, "run": "geom-kappa"},
                 "output_dir": "elsewhere", "seed": 3, "schema_version": 1 }"#,
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = 4;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn sampling_specs() {
        assert_eq!(parse_sampling("bump:1").unwrap(), SamplingFunction::bump(1.0));
        assert_eq!(parse_sampling("cos2:0.5@2").unwrap(), SamplingFunction::cos2(0.5).with_center(2.0));
        assert!(parse_sampling("gauss:1").is_err());
        assert!(parse_sampling("bump:-1").is_err());
    }
}
