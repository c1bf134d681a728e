//! JSON design configuration.
//!
//! ```json
//! {
//!   "system": { "omega_b": 314.159, "omega_g": 1, "v_g": 1, "r_g": 0, "x_g": 0.087,
//!               "d_p": 0.01, "d_q": 0.05, "omega_set": 1, "p_set": 0.5,
//!               "q_set": 0, "v_set": 1 },
//!   "cases": [ { "name": "case1", "xi": 0.4, "ts": 1.0, "a": 20 } ],
//!   "placement": "decoupled_voltage",
//!   "sim": { "t_end": 8, "dt": 1e-4, "record_every": 10, "band": 0.02,
//!            "signal": "p",
//!            "events": [ { "time": 1, "target": "p_set", "value": 1.0 } ] },
//!   "output": { "directory": "out", "formats": ["report", "csv"] }
//! }
//! ```
//!
//! Unknown keys are rejected. `a` defaults to 20, `dt` to 1e-4 s and `band`
//! to 0.02.

use std::collections::HashSet;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::PerformanceSpec;
use crate::metrics::DEFAULT_BAND;
use crate::placement::ParameterMatrix;
use crate::powerflow::SystemParams;
use crate::sim::{SetpointEvent, SetpointTarget, Signal, SimConfig, DEFAULT_DT};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub system: SystemParams,
    pub cases: Vec<CaseConfig>,
    #[serde(default)]
    pub placement: PlacementChoice,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub name: String,
    pub xi: f64,
    pub ts: f64,
    #[serde(default = "default_a")]
    pub a: f64,
}

impl CaseConfig {
    pub fn spec(&self) -> PerformanceSpec {
        PerformanceSpec { xi: self.xi, ts: self.ts, a: self.a }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementChoice {
    /// Dominant pair decoupled from the voltage-error channel.
    #[default]
    DecoupledVoltage,
    /// Fixed parameter matrix `[[1,0,1],[0,1,1]]` with the retry list.
    Default,
}

impl PlacementChoice {
    pub fn parameter_matrix(&self) -> ParameterMatrix {
        match self {
            PlacementChoice::DecoupledVoltage => ParameterMatrix::DecoupledVoltage,
            PlacementChoice::Default => ParameterMatrix::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PlacementChoice::DecoupledVoltage => "decoupled_voltage",
            PlacementChoice::Default => "default",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_band")]
    pub band: f64,
    /// Signal whose step response is summarized.
    #[serde(default = "default_signal")]
    pub signal: String,
    #[serde(default)]
    pub events: Vec<SetpointEvent>,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            t_end: default_t_end(),
            dt: default_dt(),
            record_every: default_record_every(),
            band: default_band(),
            signal: default_signal(),
            events: Vec::new(),
        }
    }
}

impl SimSection {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig { t_end: self.t_end, dt: self.dt, record_every: self.record_every }
    }

    /// Validated in [`DesignConfig::validate`].
    pub fn metric_signal(&self) -> Signal {
        self.signal.parse().unwrap_or(Signal::P)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Report,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: default_directory(), formats: default_formats() }
    }
}

fn default_a() -> f64 {
    20.0
}
fn default_t_end() -> f64 {
    8.0
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_record_every() -> usize {
    10
}
fn default_band() -> f64 {
    DEFAULT_BAND
}
fn default_signal() -> String {
    "p".into()
}
fn default_directory() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Report, OutputFormat::Csv]
}

impl DesignConfig {
    /// Benchmark converter with the four damping/settling-time cases and an
    /// active-power step from 0.5 to 1.0 p.u. at t = 1 s.
    pub fn benchmark() -> Self {
        let case = |name: &str, xi: f64, ts: f64| CaseConfig { name: name.into(), xi, ts, a: 20.0 };
        DesignConfig {
            system: SystemParams::benchmark(),
            cases: vec![
                case("case1", 0.4, 1.0),
                case("case2", 0.4, 2.0),
                case("case3", 0.707, 1.0),
                case("case4", 0.707, 2.0),
            ],
            placement: PlacementChoice::default(),
            sim: SimSection {
                events: vec![SetpointEvent { time: 1.0, target: SetpointTarget::PSet, value: 1.0 }],
                ..SimSection::default()
            },
            output: OutputSection::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system
            .validate()
            .map_err(|e| invalid("system", e.to_string()))?;

        if self.cases.is_empty() {
            return Err(invalid("cases", "at least one required"));
        }
        let mut names = HashSet::new();
        for (i, c) in self.cases.iter().enumerate() {
            let field = |f: &str| format!("cases[{i}].{f}");
            if c.name.is_empty()
                || !c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-')
            {
                return Err(invalid(field("name"), "must be non-empty [A-Za-z0-9_-]"));
            }
            if !names.insert(c.name.as_str()) {
                return Err(invalid(field("name"), format!("duplicate case name '{}'", c.name)));
            }
            if !(c.xi > 0.0 && c.xi < 1.0) {
                return Err(invalid(field("xi"), "xi must be in (0,1)"));
            }
            if !(c.ts > 0.0 && c.ts.is_finite()) {
                return Err(invalid(field("ts"), "ts must be > 0"));
            }
            if !(c.a > 0.0 && c.a.is_finite()) {
                return Err(invalid(field("a"), "a must be > 0"));
            }
        }

        let sim = &self.sim;
        self.sim
            .sim_config()
            .validate()
            .map_err(|e| invalid("sim", e.to_string()))?;
        if !(sim.band > 0.0 && sim.band < 1.0) {
            return Err(invalid("sim.band", "band must be in (0,1)"));
        }
        sim.signal
            .parse::<Signal>()
            .map_err(|e| invalid("sim.signal", e.to_string()))?;
        for (i, ev) in sim.events.iter().enumerate() {
            if !(ev.time >= 0.0 && ev.time <= sim.t_end) {
                return Err(invalid(format!("sim.events[{i}].time"), "time must be in [0, t_end]"));
            }
            if !ev.value.is_finite() {
                return Err(invalid(format!("sim.events[{i}].value"), "value must be finite"));
            }
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<DesignConfig, ConfigError> {
    let cfg: DesignConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<DesignConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn write_config(cfg: &DesignConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg).expect("config serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn validation_message(text: &str) -> String {
        match parse_config(text) {
            Err(e @ ConfigError::Validation { .. }) => e.to_string(),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    fn with(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v = serde_json::to_value(DesignConfig::benchmark()).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn benchmark_roundtrip() {
        let cfg = DesignConfig::benchmark();
        let back = parse_config(&write_config(&cfg)).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.cases.len(), 4);
    }

    #[test]
    fn defaults_filled() {
        let text = r#"{
            "system": {"omega_b": 314.0, "omega_g": 1, "v_g": 1, "r_g": 0, "x_g": 0.087,
                       "d_p": 0.01, "d_q": 0.05, "omega_set": 1, "p_set": 0.5,
                       "q_set": 0, "v_set": 1},
            "cases": [{"name": "c", "xi": 0.5, "ts": 1}]
        }"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.cases[0].a, 20.0);
        assert_eq!(cfg.sim.dt, 1e-4);
        assert_eq!(cfg.sim.band, 0.02);
        assert_eq!(cfg.placement, PlacementChoice::DecoupledVoltage);
    }

    #[test]
    fn empty_cases() {
        let msg = validation_message(&with(|v| v["cases"] = serde_json::json!([])));
        assert_eq!(msg, "cases: at least one required");
    }

    #[test]
    fn damping_out_of_range() {
        let msg = validation_message(&with(|v| v["cases"][1]["xi"] = 1.2.into()));
        assert!(msg.contains("xi must be in (0,1)"), "{msg}");
        assert!(msg.starts_with("cases[1].xi"));
    }

    #[test]
    fn duplicate_names() {
        let msg = validation_message(&with(|v| v["cases"][1]["name"] = "case1".into()));
        assert!(msg.contains("duplicate"), "{msg}");
    }

    #[test]
    fn unknown_key_is_error() {
        let text = with(|v| v["system"]["r"] = 0.1.into());
        match parse_config(&text) {
            Err(ConfigError::Parse { message, .. }) => assert!(message.contains("unknown field")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_position() {
        let text = "{\n  \"system\": {\n    \"omega_b\": ,\n";
        match parse_config(text) {
            Err(ConfigError::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn event_outside_horizon() {
        let msg = validation_message(&with(|v| v["sim"]["events"][0]["time"] = 100.0.into()));
        assert!(msg.starts_with("sim.events[0].time"), "{msg}");
    }

    #[test]
    fn zero_impedance_rejected() {
        let msg = validation_message(&with(|v| v["system"]["x_g"] = 0.0.into()));
        assert!(msg.starts_with("system:"), "{msg}");
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(
            load_config(Path::new("/nonexistent/cfg.json")),
            Err(ConfigError::Io { .. })
        ));
    }
}
