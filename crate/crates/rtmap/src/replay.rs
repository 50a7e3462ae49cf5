//! Frame-by-frame replay of scans through the mapping pipeline.

use std::fmt;
use std::str::FromStr;

use rtmap_core::frontend::{lidar_to_points, scan_to_points_with, sensor_origin};
use rtmap_core::pipeline::{FrameStats, MapPipeline};
use rtmap_core::voxel::IntensityMode;
use rtmap_core::{LidarScanRecord, PoseSource, RadarScanRecord, SensorPoint, Vec3};

use crate::config::PipelineConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sensor {
    Radar,
    Lidar,
}

impl Sensor {
    pub fn name(self) -> &'static str {
        match self {
            Sensor::Radar => "radar",
            Sensor::Lidar => "lidar",
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sensor {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "radar" => Ok(Sensor::Radar),
            "lidar" => Ok(Sensor::Lidar),
            other => Err(format!("unknown sensor `{other}`")),
        }
    }
}

/// Summary of one processed scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameInfo {
    pub index: usize,
    /// Latest timestamp in the scan; the vehicle pose is taken here.
    pub t: f64,
    pub points: usize,
    pub stats: FrameStats,
    pub vehicle: Vec3,
}

/// World-frame radar points of one sweep at `threshold`.
pub fn radar_points<P: PoseSource + ?Sized>(
    scan: &RadarScanRecord,
    config: &PipelineConfig,
    threshold: f64,
    poses: &P,
) -> Result<Vec<SensorPoint>> {
    Ok(scan_to_points_with(scan, &config.radar, threshold, poses)?)
}

pub fn lidar_points<P: PoseSource + ?Sized>(
    scan: &LidarScanRecord,
    config: &PipelineConfig,
    poses: &P,
) -> Result<Vec<SensorPoint>> {
    Ok(lidar_to_points(scan, &config.lidar, poses)?)
}

/// Radar frame time: the last azimuth timestamp.
pub fn radar_frame_time(scan: &RadarScanRecord) -> f64 {
    match scan.azimuth_count() {
        0 => scan.start_t,
        n => scan.azimuth_time(n - 1),
    }
}

/// Lidar frame time: the last point timestamp.
pub fn lidar_frame_time(scan: &LidarScanRecord) -> f64 {
    scan.points
        .iter()
        .map(|p| p.t)
        .fold(scan.start_t, f64::max)
}

/// Mapping state for one sensor.
pub struct Replayer<'a, P: PoseSource + ?Sized> {
    pub sensor: Sensor,
    config: &'a PipelineConfig,
    threshold: f64,
    poses: &'a P,
    pipeline: MapPipeline,
    frames: usize,
}

impl<'a, P: PoseSource + ?Sized> Replayer<'a, P> {
    pub fn new(sensor: Sensor, config: &'a PipelineConfig, threshold: f64, poses: &'a P) -> Self {
        let mode = match sensor {
            Sensor::Radar => IntensityMode::Intensity,
            Sensor::Lidar => IntensityMode::HitsOnly,
        };
        Self {
            sensor,
            config,
            threshold,
            poses,
            pipeline: MapPipeline::new(config.grid.clone(), config.terrain.clone(), mode),
            frames: 0,
        }
    }

    pub fn pipeline(&self) -> &MapPipeline {
        &self.pipeline
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    fn step(&mut self, points: &[SensorPoint], t: f64) -> Result<FrameInfo> {
        let vehicle = self.poses.pose_at(t)?.translation.vector;
        let stats = self.pipeline.process(points, &vehicle);
        let info = FrameInfo {
            index: self.frames,
            t,
            points: points.len(),
            stats,
            vehicle,
        };
        self.frames += 1;
        Ok(info)
    }

    pub fn radar(&mut self, scan: &RadarScanRecord) -> Result<FrameInfo> {
        let points = radar_points(scan, self.config, self.threshold, self.poses)?;
        self.step(&points, radar_frame_time(scan))
    }

    pub fn lidar(&mut self, scan: &LidarScanRecord) -> Result<FrameInfo> {
        let points = lidar_points(scan, self.config, self.poses)?;
        self.step(&points, lidar_frame_time(scan))
    }

    /// Sensor origin in the world at `t`.
    pub fn origin(&self, t: f64) -> Result<Vec3> {
        let mount = match self.sensor {
            Sensor::Radar => self.config.radar.mount_translation,
            Sensor::Lidar => self.config.lidar.mount_translation,
        };
        Ok(sensor_origin(self.poses, mount, t)?)
    }
}
