//! Sensor, grid and terrain parameters.
//!
//! Defaults follow the reference rig: a 400-azimuth scanning radar with
//! 0.044 m range bins spinning at 4 Hz, tilted 2.5° down, a 128-channel
//! lidar, and a 256×256×64 grid of 0.4 m voxels. Mount translations are
//! rig-specific and only illustrative.

use alloc::format;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RadarConfig {
    pub azimuth_count: u32,
    pub bin_count: u32,
    /// Range bin width, meters.
    pub bin_size: f64,
    /// Intensities at or above this value are detections.
    pub detection_threshold: f64,
    /// Sensor origin in the vehicle frame, meters.
    pub mount_translation: [f64; 3],
    /// Downward pitch of every beam, radians.
    pub mount_tilt: f64,
    /// Duration of one sweep, seconds.
    pub rotation_period: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            azimuth_count: 400,
            // 300 m of range.
            bin_count: 6818,
            bin_size: 0.044,
            detection_threshold: 0.26,
            mount_translation: [0.3, 0.0, 1.0],
            mount_tilt: 2.5_f64.to_radians(),
            rotation_period: 0.25,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.azimuth_count == 0 {
            return Err(ConfigError::new("radar.azimuth_count", "must be positive"));
        }
        if self.bin_count == 0 {
            return Err(ConfigError::new("radar.bin_count", "must be positive"));
        }
        if !(self.bin_size > 0.0 && self.bin_size.is_finite()) {
            return Err(ConfigError::new("radar.bin_size", "must be finite and > 0"));
        }
        check_threshold("radar.detection_threshold", self.detection_threshold)?;
        if !(self.mount_tilt > -FRAC_PI_2 && self.mount_tilt < FRAC_PI_2) {
            return Err(ConfigError::new(
                "radar.mount_tilt",
                "must lie in (-pi/2, pi/2)",
            ));
        }
        if !(self.rotation_period > 0.0 && self.rotation_period.is_finite()) {
            return Err(ConfigError::new(
                "radar.rotation_period",
                "must be finite and > 0",
            ));
        }
        check_finite3("radar.mount_translation", &self.mount_translation)
    }

    pub fn max_range(&self) -> f64 {
        self.bin_count as f64 * self.bin_size
    }

    /// Angular spacing between azimuths, radians.
    pub fn azimuth_step(&self) -> f64 {
        core::f64::consts::TAU / self.azimuth_count as f64
    }
}

/// Checks that a detection threshold lies strictly inside (0, 1).
pub fn check_threshold(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("{value} is not in (0, 1)")))
    }
}

fn check_finite3(field: &'static str, v: &[f64; 3]) -> Result<(), ConfigError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ConfigError::new(field, "components must be finite"))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LidarConfig {
    /// Sensor origin in the vehicle frame, meters. The lidar is mounted level.
    pub mount_translation: [f64; 3],
    pub channels: u32,
    pub azimuth_count: u32,
    /// Lowest and highest channel elevation, radians.
    pub vertical_fov: [f64; 2],
    pub max_range: f64,
    /// Full beam divergence, radians.
    pub divergence: f64,
    pub scan_rate_hz: f64,
    /// Standard deviation of simulated range noise, meters.
    pub range_noise_std: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            mount_translation: [0.0, 0.0, 1.4],
            channels: 128,
            azimuth_count: 1024,
            vertical_fov: [-22.5_f64.to_radians(), 22.5_f64.to_radians()],
            max_range: 50.0,
            divergence: 0.18_f64.to_radians(),
            scan_rate_hz: 20.0,
            range_noise_std: 0.0,
        }
    }
}

impl LidarConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.channels == 0 {
            return Err(ConfigError::new("lidar.channels", "must be positive"));
        }
        if self.azimuth_count == 0 {
            return Err(ConfigError::new("lidar.azimuth_count", "must be positive"));
        }
        let [lo, hi] = self.vertical_fov;
        if !(lo <= hi && lo > -FRAC_PI_2 && hi < FRAC_PI_2) {
            return Err(ConfigError::new(
                "lidar.vertical_fov",
                "needs lo <= hi inside (-pi/2, pi/2)",
            ));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(ConfigError::new("lidar.max_range", "must be finite and > 0"));
        }
        if !(self.divergence >= 0.0) {
            return Err(ConfigError::new("lidar.divergence", "must be >= 0"));
        }
        if !(self.scan_rate_hz > 0.0 && self.scan_rate_hz.is_finite()) {
            return Err(ConfigError::new("lidar.scan_rate_hz", "must be finite and > 0"));
        }
        if !(self.range_noise_std >= 0.0) {
            return Err(ConfigError::new("lidar.range_noise_std", "must be >= 0"));
        }
        check_finite3("lidar.mount_translation", &self.mount_translation)
    }

    /// Elevation of channel `ch`, radians; channels are spread evenly over the
    /// vertical field of view.
    pub fn channel_elevation(&self, ch: u32) -> f64 {
        let [lo, hi] = self.vertical_fov;
        if self.channels == 1 {
            return 0.5 * (lo + hi);
        }
        lo + (hi - lo) * ch as f64 / (self.channels - 1) as f64
    }

    pub fn scan_period(&self) -> f64 {
        1.0 / self.scan_rate_hz
    }
}

/// How accumulated voxel evidence ages. Applied once per processed frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Retention {
    /// Evidence is kept until the cell scrolls out of the grid.
    #[default]
    Keep,
    /// Hit counts are scaled by `keep_fraction` (rounded down) every frame;
    /// intensity sums shrink in proportion so mean intensities are unchanged.
    Decay { keep_fraction: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GridConfig {
    /// Cells along x, y, z.
    pub dims: [usize; 3],
    /// Voxel edge length, meters.
    pub resolution: f64,
    /// Mean intensity at or above which a voxel is solid.
    pub solid_intensity_threshold: f64,
    /// The grid scrolls once the vehicle is more than this many voxels away
    /// from the central cell.
    pub recenter_hysteresis: u32,
    pub retention: Retention,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dims: [256, 256, 64],
            resolution: 0.4,
            solid_intensity_threshold: 0.26,
            recenter_hysteresis: 1,
            retention: Retention::Keep,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dims.contains(&0) {
            return Err(ConfigError::new("grid.dims", "all dimensions must be positive"));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(ConfigError::new("grid.resolution", "must be finite and > 0"));
        }
        if !(0.0..=1.0).contains(&self.solid_intensity_threshold) {
            return Err(ConfigError::new(
                "grid.solid_intensity_threshold",
                "must lie in [0, 1]",
            ));
        }
        if let Retention::Decay { keep_fraction } = self.retention {
            if !(0.0..=1.0).contains(&keep_fraction) {
                return Err(ConfigError::new(
                    "grid.retention.keep_fraction",
                    "must lie in [0, 1]",
                ));
            }
        }
        Ok(())
    }

    /// Side length of the horizontal footprint along x, meters.
    pub fn side_length(&self) -> f64 {
        self.dims[0] as f64 * self.resolution
    }
}

/// One map's contribution to the fused cost.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CostTerm {
    pub weight: f64,
    pub cost: f64,
}

impl CostTerm {
    pub const fn new(weight: f64, cost: f64) -> Self {
        Self { weight, cost }
    }

    pub fn scale(&self) -> f64 {
        self.weight * self.cost
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TerrainConfig {
    /// Solid voxels at least this far above the ground mark an obstacle, meters.
    pub obstacle_height_threshold: f64,
    /// Half-width of the finite-difference stencil, cells.
    pub slope_neighborhood: u32,
    /// Slope at which the slope cost term saturates, radians.
    pub slope_saturation: f64,
    pub validity: CostTerm,
    pub slope: CostTerm,
    pub obstacle: CostTerm,
}

impl Default for TerrainConfig {
    fn default() -> Self {
        Self {
            obstacle_height_threshold: 1.0,
            slope_neighborhood: 1,
            slope_saturation: FRAC_PI_4,
            validity: CostTerm::new(1.0, 50.0),
            slope: CostTerm::new(1.0, 50.0),
            obstacle: CostTerm::new(1.0, 100.0),
        }
    }
}

impl TerrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.obstacle_height_threshold > 0.0 && self.obstacle_height_threshold.is_finite())
        {
            return Err(ConfigError::new(
                "terrain.obstacle_height_threshold",
                "must be finite and > 0",
            ));
        }
        if self.slope_neighborhood == 0 {
            return Err(ConfigError::new(
                "terrain.slope_neighborhood",
                "must be at least one cell",
            ));
        }
        if !(self.slope_saturation > 0.0 && self.slope_saturation <= FRAC_PI_2) {
            return Err(ConfigError::new(
                "terrain.slope_saturation",
                "must lie in (0, pi/2]",
            ));
        }
        for (field, term) in [
            ("terrain.validity", &self.validity),
            ("terrain.slope", &self.slope),
            ("terrain.obstacle", &self.obstacle),
        ] {
            if !(term.weight >= 0.0 && term.weight.is_finite()) {
                return Err(ConfigError::new(field, "weight must be finite and >= 0"));
            }
            if !(term.cost >= 0.0 && term.cost.is_finite()) {
                return Err(ConfigError::new(field, "cost must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RadarConfig::default().validate().unwrap();
        LidarConfig::default().validate().unwrap();
        GridConfig::default().validate().unwrap();
        TerrainConfig::default().validate().unwrap();
    }

    #[test]
    fn default_grid_is_102_4_m_wide() {
        assert!((GridConfig::default().side_length() - 102.4).abs() < 1e-9);
    }

    #[test]
    fn default_tilt_is_2_5_degrees() {
        assert!((RadarConfig::default().mount_tilt - 0.04363).abs() < 1e-5);
    }

    #[test]
    fn threshold_bounds_are_exclusive() {
        let mut c = RadarConfig::default();
        c.detection_threshold = 0.0;
        assert!(c.validate().is_err());
        c.detection_threshold = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn negative_weight_rejected() {
        let mut t = TerrainConfig::default();
        t.obstacle.weight = -1.0;
        let err = t.validate().unwrap_err();
        assert_eq!(err.field, "terrain.obstacle");
    }

    #[test]
    fn lidar_channels_span_fov() {
        let c = LidarConfig::default();
        assert!((c.channel_elevation(0) - c.vertical_fov[0]).abs() < 1e-12);
        assert!((c.channel_elevation(c.channels - 1) - c.vertical_fov[1]).abs() < 1e-12);
    }
}
