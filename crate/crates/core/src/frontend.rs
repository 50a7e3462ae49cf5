//! Radar and lidar frontends: thresholding and motion-compensated projection
//! into world-frame points.
//!
//! Each above-threshold radar bin becomes one point on the beam axis at the
//! bin centre. The axis is the azimuth direction pitched down by the mount
//! tilt, and it is placed in the world with the pose interpolated at that
//! azimuth's own timestamp, so motion during a sweep is compensated per
//! azimuth.

use alloc::vec::Vec;

use nalgebra::Point3;

use crate::config::{check_threshold, LidarConfig, RadarConfig};
use crate::error::{ConfigError, PoseError};
use crate::geometry::{beam_direction, Vec3};
use crate::pose::PoseSource;
use crate::scan::{LidarScanRecord, RadarScanRecord};

/// A world-frame return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorPoint {
    pub position: Vec3,
    pub intensity: f64,
    pub t: f64,
}

/// One above-threshold radar cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub azimuth: usize,
    pub bin: usize,
    pub intensity: f32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrontendError {
    #[error("bin index {index} outside 0..{bin_count}")]
    BinOutOfRange { index: usize, bin_count: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no pose for azimuth {azimuth} at t={t:.6} s: {source}")]
    Pose {
        azimuth: usize,
        t: f64,
        source: PoseError,
    },
}

/// Range of a bin centre, meters.
pub fn bin_to_range(bin_index: usize, config: &RadarConfig) -> Result<f64, FrontendError> {
    let bin_count = config.bin_count as usize;
    if bin_index >= bin_count {
        return Err(FrontendError::BinOutOfRange {
            index: bin_index,
            bin_count,
        });
    }
    Ok((bin_index as f64 + 0.5) * config.bin_size)
}

/// All cells with intensity `>= threshold`, azimuth-major then by bin.
pub fn threshold_scan(
    scan: &RadarScanRecord,
    threshold: f64,
) -> Result<Vec<Detection>, FrontendError> {
    check_threshold("threshold", threshold)?;
    // Compare in f32 so a stored 0.31 passes a 0.31 threshold.
    let thr = threshold as f32;
    let mut out = Vec::new();
    for a in 0..scan.azimuth_count() {
        for (bin, &v) in scan.row(a).iter().enumerate() {
            if v >= thr {
                out.push(Detection {
                    azimuth: a,
                    bin,
                    intensity: v,
                });
            }
        }
    }
    Ok(out)
}

/// Thresholds a sweep with `config.detection_threshold` and projects every
/// detection into the world frame.
pub fn scan_to_points<P: PoseSource + ?Sized>(
    scan: &RadarScanRecord,
    config: &RadarConfig,
    poses: &P,
) -> Result<Vec<SensorPoint>, FrontendError> {
    scan_to_points_with(scan, config, config.detection_threshold, poses)
}

/// As [`scan_to_points`] with an explicit threshold.
pub fn scan_to_points_with<P: PoseSource + ?Sized>(
    scan: &RadarScanRecord,
    config: &RadarConfig,
    threshold: f64,
    poses: &P,
) -> Result<Vec<SensorPoint>, FrontendError> {
    let detections = threshold_scan(scan, threshold)?;
    let mount = Point3::from(config.mount_translation);
    let mut out = Vec::with_capacity(detections.len());
    let mut current: Option<(usize, Vec3, Vec3)> = None;
    for d in detections {
        let (origin, dir) = match current {
            Some((a, o, dir)) if a == d.azimuth => (o, dir),
            _ => {
                let t = scan.azimuth_time(d.azimuth);
                let pose = poses.pose_at(t).map_err(|source| FrontendError::Pose {
                    azimuth: d.azimuth,
                    t,
                    source,
                })?;
                let origin = (pose * mount).coords;
                let dir = pose.rotation
                    * beam_direction(scan.azimuth_angle(d.azimuth), config.mount_tilt);
                current = Some((d.azimuth, origin, dir));
                (origin, dir)
            }
        };
        let range = (d.bin as f64 + 0.5) * scan.bin_size;
        out.push(SensorPoint {
            position: origin + dir * range,
            intensity: d.intensity as f64,
            t: scan.azimuth_time(d.azimuth),
        });
    }
    Ok(out)
}

/// Transforms every lidar point into the world frame with the pose at its own
/// timestamp. No filtering is applied.
pub fn lidar_to_points<P: PoseSource + ?Sized>(
    scan: &LidarScanRecord,
    config: &LidarConfig,
    poses: &P,
) -> Result<Vec<SensorPoint>, FrontendError> {
    let mount = Vec3::from(config.mount_translation);
    let mut out = Vec::with_capacity(scan.points.len());
    let mut cached: Option<(f64, crate::geometry::Pose)> = None;
    for (i, p) in scan.points.iter().enumerate() {
        let pose = match cached {
            Some((t, pose)) if t == p.t => pose,
            _ => {
                let pose = poses.pose_at(p.t).map_err(|source| FrontendError::Pose {
                    azimuth: i,
                    t: p.t,
                    source,
                })?;
                cached = Some((p.t, pose));
                pose
            }
        };
        let local = Vec3::new(
            p.position[0] as f64,
            p.position[1] as f64,
            p.position[2] as f64,
        ) + mount;
        out.push(SensorPoint {
            position: (pose * Point3::from(local)).coords,
            intensity: p.intensity as f64,
            t: p.t,
        });
    }
    Ok(out)
}

/// Sensor origin in the world frame at time `t`.
pub fn sensor_origin<P: PoseSource + ?Sized>(
    poses: &P,
    mount: [f64; 3],
    t: f64,
) -> Result<Vec3, PoseError> {
    Ok((poses.pose_at(t)? * Point3::from(mount)).coords)
}
