//! The single JSON configuration document.
//!
//! Every section is optional and defaults to the reference rig. Unknown keys
//! are rejected at every level.

use std::path::Path;

use rtmap_core::error::ConfigError;
use rtmap_core::sim::SimConfig;
use rtmap_core::{GridConfig, LidarConfig, RadarConfig, TerrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    /// Range histogram bin width, meters.
    pub bin_width: f64,
    /// Minimum share of points, percent, for a bin to count towards the
    /// effective range.
    pub floor_pct: f64,
    /// Consecutive obstacle frames required before an object counts as detected.
    pub debounce_frames: usize,
    /// Also write SVG plots next to the CSV files.
    pub svg: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            bin_width: 1.0,
            floor_pct: 0.25,
            debounce_frames: 2,
            svg: false,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(ConfigError::new("eval.bin_width", "must be finite and > 0"));
        }
        if !(0.0..=100.0).contains(&self.floor_pct) {
            return Err(ConfigError::new("eval.floor_pct", "must lie in [0, 100]"));
        }
        if self.debounce_frames == 0 {
            return Err(ConfigError::new("eval.debounce_frames", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub radar: RadarConfig,
    pub lidar: LidarConfig,
    pub grid: GridConfig,
    pub terrain: TerrainConfig,
    pub sim: SimConfig,
    pub eval: EvalOptions,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.radar.validate()?;
        self.lidar.validate()?;
        self.grid.validate()?;
        self.terrain.validate()?;
        self.sim.validate(&self.radar)?;
        self.eval.validate()
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_json(&text).map_err(|m| Error::parse(path, m))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The configuration file, or the defaults when no path is given.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_rig() {
        let c = PipelineConfig::from_json("{}").unwrap();
        assert_eq!(c.radar.detection_threshold, 0.26);
        assert_eq!(c.radar.azimuth_count, 400);
        assert_eq!(c.radar.bin_size, 0.044);
        assert!((c.radar.mount_tilt - 0.04363).abs() < 1e-5);
        assert_eq!(c.grid.dims, [256, 256, 64]);
        assert_eq!(c.grid.resolution, 0.4);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PipelineConfig::from_json(r#"{"radar": {"bins": 3}}"#).unwrap_err();
        assert!(err.contains("bins"), "{err}");
        assert!(PipelineConfig::from_json(r#"{"extra": 1}"#).is_err());
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let c = PipelineConfig::from_json(r#"{"radar": {"detection_threshold": 0.31}}"#).unwrap();
        assert_eq!(c.radar.detection_threshold, 0.31);
        assert_eq!(c.radar.bin_size, 0.044);
    }

    #[test]
    fn round_trips_through_json() {
        let c = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_json(&c.to_json_pretty()).unwrap(), c);
    }

    #[test]
    fn negative_weight_is_a_config_error() {
        let c = PipelineConfig::from_json(
            r#"{"terrain": {"obstacle": {"weight": -1.0, "cost": 100.0}}}"#,
        )
        .unwrap();
        assert_eq!(c.validate().unwrap_err().field, "terrain.obstacle");
    }
}
