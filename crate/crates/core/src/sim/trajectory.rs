//! Constant-speed waypoint trajectories that follow the terrain, plus the
//! scan schedule of a simulated run.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use super::scene::{Heightfield, Scene};
use crate::error::{ConfigError, PoseError};
use crate::geometry::{orientation_ypr, pose_from_parts, Pose, Vec3};
use crate::pose::{OdometrySample, PoseSource};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TrajectorySpec {
    /// Horizontal waypoints, meters. A single waypoint makes a stationary run.
    pub waypoints: Vec<[f64; 2]>,
    /// Driving speed, m/s.
    pub speed: f64,
    /// Time spent standing still at the last waypoint, seconds.
    pub hold: f64,
}

impl TrajectorySpec {
    pub fn new(waypoints: Vec<[f64; 2]>, speed: f64) -> Self {
        Self {
            waypoints,
            speed,
            hold: 0.0,
        }
    }

    /// A straight run of `length` meters from `start` along `heading`, with a
    /// waypoint every `spacing` meters.
    pub fn straight(start: [f64; 2], heading: f64, length: f64, spacing: f64, speed: f64) -> Self {
        let n = (length / spacing).ceil().max(1.0) as usize;
        let (s, c) = heading.sin_cos();
        let waypoints = (0..=n)
            .map(|k| {
                let d = length * k as f64 / n as f64;
                [start[0] + c * d, start[1] + s * d]
            })
            .collect();
        Self::new(waypoints, speed)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.waypoints.is_empty() {
            return Err(ConfigError::new("trajectory.waypoints", "needs at least one waypoint"));
        }
        if !self.waypoints.iter().flatten().all(|v| v.is_finite()) {
            return Err(ConfigError::new("trajectory.waypoints", "must be finite"));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(ConfigError::new("trajectory.speed", "must be finite and > 0"));
        }
        if !(self.hold >= 0.0 && self.hold.is_finite()) {
            return Err(ConfigError::new("trajectory.hold", "must be finite and >= 0"));
        }
        if self.waypoints.len() == 1 && self.hold == 0.0 {
            return Err(ConfigError::new(
                "trajectory.hold",
                "a single waypoint needs a positive hold time",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trajectory leaves the scene at t={t:.3} s, position ({x:.2}, {y:.2})")]
    ExitsScene { t: f64, x: f64, y: f64 },
}

/// Sensor of a scheduled scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScanKind {
    Radar,
    Lidar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSlot {
    pub kind: ScanKind,
    /// Index among scans of the same kind.
    pub index: usize,
    pub start_t: f64,
}

/// A validated trajectory over a scene's terrain.
#[derive(Debug, Clone)]
pub struct Trajectory {
    spec: TrajectorySpec,
    ground: Option<Heightfield>,
    /// Cumulative path length at each waypoint.
    cumulative: Vec<f64>,
    duration: f64,
}

impl Trajectory {
    pub fn new(spec: TrajectorySpec, scene: &Scene) -> Result<Self, TrajectoryError> {
        spec.validate()?;
        let mut cumulative = Vec::with_capacity(spec.waypoints.len());
        let mut s = 0.0;
        cumulative.push(0.0);
        for w in spec.waypoints.windows(2) {
            s += (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            cumulative.push(s);
        }
        let duration = s / spec.speed + spec.hold;
        let traj = Self {
            ground: scene.ground.clone(),
            spec,
            cumulative,
            duration,
        };
        // Check containment at a fine step along the whole run.
        let step = 0.05;
        let n = (duration / step).ceil() as usize;
        for k in 0..=n {
            let t = (k as f64 * step).min(duration);
            let [x, y] = traj.xy_yaw(t).0;
            if !scene.contains_xy(x, y) {
                return Err(TrajectoryError::ExitsScene { t, x, y });
            }
        }
        Ok(traj)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn spec(&self) -> &TrajectorySpec {
        &self.spec
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    fn xy_yaw(&self, t: f64) -> ([f64; 2], f64) {
        let w = &self.spec.waypoints;
        if w.len() == 1 {
            return (w[0], 0.0);
        }
        let s = (t * self.spec.speed).clamp(0.0, self.length());
        // Segment containing s; the last segment owns the end point.
        let seg = self
            .cumulative
            .partition_point(|&c| c <= s)
            .saturating_sub(1)
            .min(w.len() - 2);
        let (a, b) = (w[seg], w[seg + 1]);
        let len = self.cumulative[seg + 1] - self.cumulative[seg];
        let u = if len > 0.0 {
            (s - self.cumulative[seg]) / len
        } else {
            0.0
        };
        let yaw = (b[1] - a[1]).atan2(b[0] - a[0]);
        ([a[0] + (b[0] - a[0]) * u, a[1] + (b[1] - a[1]) * u], yaw)
    }

    /// Exact vehicle pose: on the terrain, pitched and rolled to its gradient.
    pub fn pose(&self, t: f64) -> Pose {
        let ([x, y], yaw) = self.xy_yaw(t);
        let (z, pitch, roll) = match &self.ground {
            Some(g) => {
                let grad = g.gradient(x, y);
                let (s, c) = yaw.sin_cos();
                let fwd = grad[0] * c + grad[1] * s;
                let left = -grad[0] * s + grad[1] * c;
                (g.height(x, y), -fwd.atan(), left.atan())
            }
            None => (0.0, 0.0, 0.0),
        };
        pose_from_parts(Vec3::new(x, y, z), orientation_ypr(yaw, pitch, roll))
    }

    /// Odometry samples at `rate_hz` from 0 to the end of the run; the last
    /// sample sits exactly at the end.
    pub fn odometry(&self, rate_hz: f64) -> Vec<OdometrySample> {
        let n = (self.duration * rate_hz + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| k as f64 / rate_hz).collect();
        if let Some(&last) = times.last() {
            if self.duration - last > 1e-9 {
                times.push(self.duration);
            }
        }
        times
            .into_iter()
            .map(|t| {
                let p = self.pose(t);
                OdometrySample {
                    t,
                    position: p.translation.vector,
                    orientation: p.rotation,
                }
            })
            .collect()
    }

    /// Scan start times of both sensors in time order; radar first on ties.
    pub fn schedule(&self, radar_period: f64, lidar_period: f64) -> Vec<ScanSlot> {
        let count = |period: f64| (self.duration / period + 1e-9).floor() as usize;
        let mut slots: Vec<ScanSlot> = (0..count(radar_period))
            .map(|index| ScanSlot {
                kind: ScanKind::Radar,
                index,
                start_t: index as f64 * radar_period,
            })
            .chain((0..count(lidar_period)).map(|index| ScanSlot {
                kind: ScanKind::Lidar,
                index,
                start_t: index as f64 * lidar_period,
            }))
            .collect();
        slots.sort_by(|a, b| {
            a.start_t
                .total_cmp(&b.start_t)
                .then((a.kind == ScanKind::Lidar).cmp(&(b.kind == ScanKind::Lidar)))
        });
        slots
    }
}

impl PoseSource for Trajectory {
    fn pose_at(&self, t: f64) -> Result<Pose, PoseError> {
        if !(t >= 0.0 && t <= self.duration + 1e-9) {
            return Err(PoseError::Extrapolation {
                t,
                first: 0.0,
                last: self.duration,
            });
        }
        Ok(self.pose(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_scene() -> Scene {
        Scene::new([[-100.0, -100.0], [100.0, 100.0]], Some(Heightfield::flat(0.0)))
    }

    #[test]
    fn ten_second_schedule() {
        let spec = TrajectorySpec::straight([0.0, 0.0], 0.0, 25.0, 20.0, 2.5);
        let t = Trajectory::new(spec, &open_scene()).unwrap();
        assert!((t.duration() - 10.0).abs() < 1e-12);
        let slots = t.schedule(0.25, 0.05);
        let radar = slots.iter().filter(|s| s.kind == ScanKind::Radar).count();
        assert_eq!((radar, slots.len() - radar), (40, 200));
        assert_eq!(t.odometry(100.0).len(), 1001);
    }

    #[test]
    fn leaving_the_scene_is_an_error() {
        let spec = TrajectorySpec::straight([90.0, 0.0], 0.0, 20.0, 20.0, 2.5);
        let err = Trajectory::new(spec, &open_scene()).unwrap_err();
        let TrajectoryError::ExitsScene { t, .. } = err else {
            panic!("{err}");
        };
        assert!((t - 4.0).abs() < 0.06);
    }

    #[test]
    fn pitch_follows_slope() {
        let scene = Scene::new(
            [[-100.0, -100.0], [100.0, 100.0]],
            Some(Heightfield::Plane {
                z0: 0.0,
                gradient: [0.1, 0.0],
            }),
        );
        let spec = TrajectorySpec::straight([0.0, 0.0], 0.0, 10.0, 20.0, 2.5);
        let t = Trajectory::new(spec, &scene).unwrap();
        let p = t.pose(2.0);
        // Driving uphill: the nose points up, so forward has a positive z.
        let fwd = p.rotation * Vec3::x();
        assert!((fwd.z - 0.1f64.atan().sin()).abs() < 1e-12);
        assert!((p.translation.vector.z - 0.5).abs() < 1e-12);
    }
}
