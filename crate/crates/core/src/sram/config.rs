//! Plain-text `key = value` configuration for cell sizing and experiment plans.

use std::collections::BTreeMap;

use thiserror::Error;

use super::experiment::{ExperimentMode, ExperimentPlan};
use super::SramCellParams;
use crate::netlist::parse_number;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key '{key}'")]
    Duplicate { line: usize, key: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("key '{key}': bad value '{value}'")]
    BadValue { key: String, value: String },
}

/// Parse `key = value` lines. `#` starts a comment; keys are lowercased.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        if out.insert(k.clone(), v).is_some() {
            return Err(ConfigError::Duplicate { line: i + 1, key: k });
        }
    }
    Ok(out)
}

fn number(key: &str, value: &str) -> Result<f64, ConfigError> {
    parse_number(value).ok_or_else(|| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        }),
    }
}

impl SramCellParams {
    /// Apply sizing keys (`vdd`, `length`, `driver_wl`, `access_wl`,
    /// `load_wl`, `bitline_c`, `cell_ratio`) on top of `self`.
    pub fn with_overrides(&self, kv: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut p = self.clone();
        let mut ratio = None;
        for (k, v) in kv {
            let slot = match k.as_str() {
                "vdd" => &mut p.vdd,
                "length" | "l" => &mut p.length,
                "driver_wl" => &mut p.driver_wl,
                "access_wl" => &mut p.access_wl,
                "load_wl" => &mut p.load_wl,
                "bitline_c" => &mut p.bitline_c,
                "cell_ratio" => ratio.insert(0.0),
                _ => return Err(ConfigError::UnknownKey(k.clone())),
            };
            *slot = number(k, v)?;
        }
        if let Some(r) = ratio {
            p = p.with_cell_ratio(r);
        }
        Ok(p)
    }
}

impl ExperimentPlan {
    /// Apply plan keys (`mode`, `ramp`, `wl_high`, `low`, `edge`, `dt`, `rail_only`) on top of `self`.
    pub fn with_overrides(&self, kv: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut plan = self.clone();
        for (k, v) in kv {
            match k.as_str() {
                "mode" => {
                    plan.mode = v.parse::<ExperimentMode>().map_err(|_| ConfigError::BadValue {
                        key: k.clone(),
                        value: v.clone(),
                    })?
                }
                "ramp" => plan.timing.ramp = number(k, v)?,
                "wl_high" => plan.timing.wl_high = number(k, v)?,
                "low" => plan.timing.low = number(k, v)?,
                "edge" => plan.timing.edge = number(k, v)?,
                "dt" => plan.timing.dt = number(k, v)?,
                "rail_only" => plan.rail_only = boolean(k, v)?,
                _ => return Err(ConfigError::UnknownKey(k.clone())),
            }
        }
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies() {
        let kv = parse_key_values("# sizing\nvdd = 1.2\ncell_ratio=3 # strong\n\n").unwrap();
        let p = SramCellParams::default().with_overrides(&kv).unwrap();
        assert_eq!(p.vdd, 1.2);
        assert_eq!(p.cell_ratio(), 3.0);
        let kv = parse_key_values("mode = write-read\nramp = 2n\nrail_only = yes").unwrap();
        let plan = ExperimentPlan::new(ExperimentMode::Write0Write1)
            .with_overrides(&kv)
            .unwrap();
        assert_eq!(plan.mode, ExperimentMode::WriteRead);
        assert_eq!(plan.timing.ramp, 2e-9);
        assert!(plan.rail_only);
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_key_values("a = 1\nb").unwrap_err(),
            ConfigError::Syntax { line: 2 }
        );
        assert!(matches!(
            parse_key_values("a=1\na=2"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        let kv = parse_key_values("colour = red").unwrap();
        assert!(matches!(
            SramCellParams::default().with_overrides(&kv),
            Err(ConfigError::UnknownKey(_))
        ));
        let kv = parse_key_values("vdd = fast").unwrap();
        assert!(matches!(
            SramCellParams::default().with_overrides(&kv),
            Err(ConfigError::BadValue { .. })
        ));
    }
}
