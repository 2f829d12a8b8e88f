//! JSON run configuration.
//!
//! All fields are optional except `mechanism` and exactly one of
//! `strut_length` / `target_side`. Missing fields take the documented
//! defaults; unknown fields are rejected so typos surface as errors.

use serde::{Deserialize, Serialize};
use std::path::Path;

use pkm_core::mechanisms::MechanismKind;
use pkm_core::workspace::DesignOptions;
use pkm_core::VafBounds;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub lo: f64,
    pub hi: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            lo: 1.0 / 3.0,
            hi: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Half-range of the center scan along the symmetry axis, in units
    /// of the strut length.
    pub along_rel: f64,
    pub perp_rel: f64,
    pub step_rel: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            along_rel: 0.3,
            perp_rel: 0.3,
            step_rel: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlotToggles {
    pub cworkspace: bool,
    pub vaf_heatmap: bool,
    pub isotropy_locus: bool,
    pub workspace_square: bool,
    pub ellipses: bool,
}

impl Default for PlotToggles {
    fn default() -> Self {
        PlotToggles {
            cworkspace: true,
            vaf_heatmap: true,
            isotropy_locus: true,
            workspace_square: true,
            ellipses: false,
        }
    }
}

fn default_thetas() -> Vec<f64> {
    vec![0.0, 45.0]
}

fn default_n_side() -> usize {
    257
}

fn default_pitch_rel() -> f64 {
    0.01
}

fn default_out_dir() -> String {
    "out".into()
}

/// Validated run configuration; see the repository README for the
/// documented schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mechanism: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strut_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_side: Option<f64>,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default = "default_thetas")]
    pub thetas_deg: Vec<f64>,
    #[serde(default = "default_n_side")]
    pub n_side: usize,
    #[serde(default = "default_pitch_rel")]
    pub pitch_rel: f64,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub plots: PlotToggles,
}

impl RunConfig {
    pub fn kind(&self) -> Result<MechanismKind, ConfigError> {
        parse_mechanism(&self.mechanism).map_err(|reason| ConfigError::Invalid {
            field: "mechanism",
            reason,
        })
    }

    pub fn vaf_bounds(&self) -> Result<VafBounds, ConfigError> {
        if !(self.bounds.lo > 0.0 && self.bounds.lo <= 1.0) {
            return Err(ConfigError::Invalid {
                field: "bounds.lo",
                reason: format!("need 0 < lo <= 1, got {}", self.bounds.lo),
            });
        }
        if !(self.bounds.hi >= 1.0) {
            return Err(ConfigError::Invalid {
                field: "bounds.hi",
                reason: format!("need hi >= 1, got {}", self.bounds.hi),
            });
        }
        VafBounds::new(self.bounds.lo, self.bounds.hi).map_err(|e| ConfigError::Invalid {
            field: "bounds",
            reason: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.kind()?;
        self.vaf_bounds()?;
        match (self.strut_length, self.target_side) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid {
                    field: "strut_length/target_side",
                    reason: "exactly one of the two must be given, got both".into(),
                })
            }
            (None, None) => {
                return Err(ConfigError::Invalid {
                    field: "strut_length/target_side",
                    reason: "exactly one of the two must be given, got neither".into(),
                })
            }
            (Some(l), None) if !(l > 0.0) => {
                return Err(ConfigError::Invalid {
                    field: "strut_length",
                    reason: format!("must be positive, got {l}"),
                })
            }
            (None, Some(t)) if !(t > 0.0) => {
                return Err(ConfigError::Invalid {
                    field: "target_side",
                    reason: format!("must be positive, got {t}"),
                })
            }
            _ => {}
        }
        if self.thetas_deg.is_empty() {
            return Err(ConfigError::Invalid {
                field: "thetas_deg",
                reason: "need at least one orientation".into(),
            });
        }
        if self.n_side < 33 {
            return Err(ConfigError::Invalid {
                field: "n_side",
                reason: format!("need at least 33 samples per side, got {}", self.n_side),
            });
        }
        if !(self.pitch_rel > 0.0) {
            return Err(ConfigError::Invalid {
                field: "pitch_rel",
                reason: format!("must be positive, got {}", self.pitch_rel),
            });
        }
        if !(self.scan.step_rel > 0.0) {
            return Err(ConfigError::Invalid {
                field: "scan.step_rel",
                reason: format!("must be positive, got {}", self.scan.step_rel),
            });
        }
        Ok(())
    }

    /// Design-pipeline options derived from the config knobs.
    pub fn design_options(&self) -> DesignOptions {
        DesignOptions {
            n_side: self.n_side,
            scan_along_rel: self.scan.along_rel,
            scan_perp_rel: self.scan.perp_rel,
            scan_step_rel: self.scan.step_rel,
            thetas: self
                .thetas_deg
                .iter()
                .map(|d| d.to_radians())
                .collect(),
            ..DesignOptions::default()
        }
    }
}

pub fn parse_mechanism(name: &str) -> Result<MechanismKind, String> {
    match name.to_ascii_lowercase().as_str() {
        "biglide" => Ok(MechanismKind::Biglide),
        "orthoglide2" | "orthoglide2d" | "orthoglide" => Ok(MechanismKind::Orthoglide2D),
        other => Err(format!(
            "unknown mechanism `{other}`; expected `biglide` or `orthoglide2`"
        )),
    }
}

/// Loads and validates a config file, filling defaults.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// Serializes a config; `load_config` of the output reproduces it.
pub fn config_to_json(config: &RunConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let f = write_tmp(r#"{"mechanism":"orthoglide2","target_side":1.0}"#);
        let cfg = load_config(f.path()).unwrap();
        assert_eq!(cfg.kind().unwrap(), MechanismKind::Orthoglide2D);
        assert!((cfg.bounds.lo - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(cfg.bounds.hi, 3.0);
        assert_eq!(cfg.n_side, 257);
        assert_eq!(cfg.pitch_rel, 0.01);
        assert_eq!(cfg.thetas_deg, vec![0.0, 45.0]);
        assert_eq!(cfg.out_dir, "out");
        assert!(cfg.plots.cworkspace);
    }

    #[test]
    fn inverted_bounds_rejected() {
        let f = write_tmp(
            r#"{"mechanism":"biglide","target_side":1.0,"bounds":{"lo":3.0,"hi":0.5}}"#,
        );
        match load_config(f.path()) {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "bounds.lo"),
            other => panic!("expected invalid-field error, got {other:?}"),
        }
    }

    #[test]
    fn both_lengths_rejected() {
        let f = write_tmp(r#"{"mechanism":"biglide","target_side":1.0,"strut_length":2.0}"#);
        assert!(matches!(
            load_config(f.path()),
            Err(ConfigError::Invalid {
                field: "strut_length/target_side",
                ..
            })
        ));
    }

    #[test]
    fn parse_error_carries_line_info() {
        let f = write_tmp("{\n  \"mechanism\": \"biglide\",\n  oops\n}");
        match load_config(f.path()) {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let f = write_tmp(r#"{"mechanism":"biglide","target_side":1.0,"pich_rel":0.01}"#);
        assert!(matches!(load_config(f.path()), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn full_config_round_trips() {
        let f = write_tmp(
            r#"{
  "mechanism": "biglide",
  "target_side": 1.5,
  "bounds": {"lo": 0.25, "hi": 4.0},
  "thetas_deg": [0.0, 30.0, 45.0],
  "n_side": 129,
  "pitch_rel": 0.02,
  "scan": {"along_rel": 0.25, "perp_rel": 0.1, "step_rel": 0.05},
  "out_dir": "results",
  "plots": {"cworkspace": false, "vaf_heatmap": true, "isotropy_locus": false, "workspace_square": true, "ellipses": true}
}"#,
        );
        let cfg = load_config(f.path()).unwrap();
        let emitted = config_to_json(&cfg);
        let f2 = write_tmp(&emitted);
        let cfg2 = load_config(f2.path()).unwrap();
        assert_eq!(cfg, cfg2);
    }
}
