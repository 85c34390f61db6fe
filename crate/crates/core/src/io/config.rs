//! Flat `key = value` run configuration.

use std::path::PathBuf;

use toml::{Table, Value};

use crate::criteria::AssessConfig;
use crate::error::{Error, Result};

/// Assessment thresholds plus run options.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub assess: AssessConfig,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Worker threads for batch runs.
    pub jobs: Option<usize>,
    /// Write an overlay PNG next to each result.
    pub overlay: bool,
}

pub const KEYS: [&str; 13] = [
    "angle_limit_deg",
    "magnification_min",
    "gap_ratio_lo",
    "gap_ratio_hi",
    "palate_min_area",
    "caliper_window",
    "caliper_std_min",
    "min_component_area",
    "face_up_flip",
    "jobs",
    "overlay",
    "input",
    "output",
];

fn err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn float(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(err(key, format!("expected a number, got {}", other.type_str()))),
    }
}

fn count(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::Integer(_) => Err(err(key, "must be >= 0")),
        other => Err(err(key, format!("expected an integer, got {}", other.type_str()))),
    }
}

fn flag(key: &str, v: &Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| err(key, format!("expected true or false, got {}", v.type_str())))
}

fn path(key: &str, v: &Value) -> Result<PathBuf> {
    v.as_str()
        .map(PathBuf::from)
        .ok_or_else(|| err(key, format!("expected a string, got {}", v.type_str())))
}

/// Parses the configuration, applying defaults and validating ranges.
pub fn load_config(payload: &str) -> Result<RunConfig> {
    let table: Table = payload.parse().map_err(|e: toml::de::Error| {
        err(
            "<file>",
            e.message().to_string(),
        )
    })?;
    let mut cfg = RunConfig::default();
    for (key, value) in &table {
        let k = key.as_str();
        let a = &mut cfg.assess;
        match k {
            "angle_limit_deg" => a.angle_limit_deg = float(k, value)?,
            "magnification_min" => a.magnification_min = float(k, value)?,
            "gap_ratio_lo" => a.gap_ratio_lo = float(k, value)?,
            "gap_ratio_hi" => a.gap_ratio_hi = float(k, value)?,
            "palate_min_area" => a.palate_min_area = count(k, value)? as usize,
            "caliper_window" => {
                a.caliper_window = u32::try_from(count(k, value)?).map_err(|_| err(k, "too large"))?
            }
            "caliper_std_min" => a.caliper_std_min = float(k, value)?,
            "min_component_area" => a.min_component_area = count(k, value)? as usize,
            "face_up_flip" => a.face_up_flip = flag(k, value)?,
            "jobs" => {
                let n = count(k, value)?;
                if n == 0 {
                    return Err(err(k, "must be >= 1"));
                }
                cfg.jobs = Some(n as usize);
            }
            "overlay" => cfg.overlay = flag(k, value)?,
            "input" => cfg.input = Some(path(k, value)?),
            "output" => cfg.output = Some(path(k, value)?),
            _ => return Err(err(k, "unknown key")),
        }
    }
    cfg.assess.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_payload_gives_defaults() {
        let cfg = load_config("").unwrap();
        assert_eq!(cfg.assess, AssessConfig::default());
        assert_eq!(cfg.assess.angle_limit_deg, 15.0);
        assert_eq!(cfg.assess.magnification_min, 0.60);
        assert_eq!(cfg.jobs, None);
    }

    #[test]
    fn values_pass_through() {
        let cfg = load_config("angle_limit_deg = 10\njobs = 3\noverlay = true\nface_up_flip = true\n").unwrap();
        assert_eq!(cfg.assess.angle_limit_deg, 10.0);
        assert_eq!(cfg.jobs, Some(3));
        assert!(cfg.overlay);
        assert!(cfg.assess.face_up_flip);
    }

    #[test]
    fn ordering_violation_names_key() {
        match load_config("gap_ratio_lo = 0.5\ngap_ratio_hi = 0.3\n") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "gap_ratio_hi"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_and_mistyped_keys() {
        assert!(matches!(load_config("colour = 1"), Err(Error::Config { key, .. }) if key == "colour"));
        assert!(matches!(load_config("jobs = 0"), Err(Error::Config { key, .. }) if key == "jobs"));
        assert!(matches!(load_config("palate_min_area = 1.5"), Err(Error::Config { key, .. }) if key == "palate_min_area"));
        assert!(matches!(load_config("overlay = 1"), Err(Error::Config { .. })));
        assert!(load_config("this is = = not toml").is_err());
    }
}
