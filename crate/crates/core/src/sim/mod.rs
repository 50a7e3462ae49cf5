//! Synthetic radar and lidar over parametric scenes.
//!
//! The radar is a cone per azimuth with analytic partial occupancy; the lidar
//! is a set of thin rays. Both are deterministic given a seed: every scan
//! draws from its own ChaCha stream, so scans can be generated in any order.

mod lidar;
mod radar;
mod scene;
mod trajectory;

pub use lidar::{simulate_lidar_scan, LidarSimulator};
pub use radar::{azimuth_returns, simulate_radar_ideal, simulate_radar_scan, Return, RadarSimulator};
pub use scene::{Heightfield, Scene, SceneObject, Shape};
pub use trajectory::{ScanKind, ScanSlot, Trajectory, TrajectoryError, TrajectorySpec};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RadarConfig;
use crate::error::ConfigError;

/// Simulator parameters that are not part of the sensor configurations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SimConfig {
    pub seed: u64,
    /// Full vertical width of the radar cone, radians.
    pub elevation_beamwidth: f64,
    /// Mean of the per-bin Gaussian radar noise.
    pub noise_mean: f64,
    /// Standard deviation of the per-bin radar noise.
    pub noise_std: f64,
    /// Odometry output rate, Hz.
    pub odometry_rate_hz: f64,
    /// Driving speed along the waypoints, m/s.
    pub speed: f64,
    /// Time spent stationary at the last waypoint, seconds.
    pub hold: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            elevation_beamwidth: 1.8_f64.to_radians(),
            noise_mean: 0.12,
            noise_std: 0.04,
            odometry_rate_hz: 100.0,
            speed: 2.5,
            hold: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, radar: &RadarConfig) -> Result<(), ConfigError> {
        if !(self.elevation_beamwidth > 0.0 && self.elevation_beamwidth < core::f64::consts::PI) {
            return Err(ConfigError::new(
                "sim.elevation_beamwidth",
                "must lie in (0, pi)",
            ));
        }
        if !(self.noise_std >= 0.0 && self.noise_mean >= 0.0) {
            return Err(ConfigError::new("sim.noise_std", "noise parameters must be >= 0"));
        }
        if !(self.noise_mean + 3.0 * self.noise_std < radar.detection_threshold) {
            return Err(ConfigError::new(
                "sim.noise_mean",
                "noise mean plus three deviations must stay below the detection threshold",
            ));
        }
        if !(self.odometry_rate_hz > 0.0 && self.odometry_rate_hz.is_finite()) {
            return Err(ConfigError::new("sim.odometry_rate_hz", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// The random stream for one scan. Radar scan `i` uses stream `2i`, lidar
/// scan `i` stream `2i + 1`.
pub fn scan_rng(seed: u64, kind: ScanKind, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = 2 * index as u64;
    rng.set_stream(match kind {
        ScanKind::Radar => base,
        ScanKind::Lidar => base + 1,
    });
    rng
}
