//! Thin-ray lidar: the nearest hit of each channel and azimuth ray with the
//! terrain or any object that is not fully transmissive, within max range.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::Point3;
use rand_chacha::rand_core::RngCore;
use rand_distr::{Distribution, Normal};

use super::scene::{Heightfield, Scene, SceneObject};
use crate::config::LidarConfig;
use crate::error::PoseError;
use crate::geometry::Vec3;
use crate::pose::PoseSource;
use crate::scan::{LidarPoint, LidarScanRecord};

#[derive(Debug, Clone)]
pub struct LidarSimulator<'a> {
    scene: &'a Scene,
    lidar: &'a LidarConfig,
    lipschitz: f64,
    max_height: f64,
    /// Unit ray directions in the sensor frame, azimuth-major.
    rays: Vec<Vec3>,
}

impl<'a> LidarSimulator<'a> {
    pub fn new(scene: &'a Scene, lidar: &'a LidarConfig) -> Self {
        let (lipschitz, max_height) = scene
            .ground
            .as_ref()
            .map_or((0.0, f64::NEG_INFINITY), |g| (g.lipschitz(), g.max_height()));
        let mut rays = Vec::with_capacity((lidar.azimuth_count * lidar.channels) as usize);
        for a in 0..lidar.azimuth_count {
            let (sa, ca) = (a as f64 * TAU / lidar.azimuth_count as f64).sin_cos();
            for c in 0..lidar.channels {
                let (se, ce) = lidar.channel_elevation(c).sin_cos();
                rays.push(Vec3::new(ce * ca, ce * sa, se));
            }
        }
        Self {
            scene,
            lidar,
            lipschitz,
            max_height,
            rays,
        }
    }

    /// Nearest hit `(distance, reflectivity)` of a world-frame ray.
    pub fn cast(&self, o: &Vec3, d: &Vec3, objects: &[&SceneObject]) -> Option<(f64, f64)> {
        let max = self.lidar.max_range;
        let mut best: Option<(f64, f64)> = None;
        for obj in objects {
            if obj.transmissivity >= 1.0 {
                continue;
            }
            if let Some(t) = obj.shape.ray_entry_3d(o, d) {
                if t <= max && best.is_none_or(|(b, _)| t < b) {
                    best = Some((t, obj.reflectivity));
                }
            }
        }
        if let Some(g) = &self.scene.ground {
            let limit = best.map_or(max, |(t, _)| t);
            if let Some(t) = self.ground_hit(g, o, d, limit) {
                best = Some((t, self.scene.ground_reflectivity));
            }
        }
        best
    }

    fn ground_hit(&self, g: &Heightfield, o: &Vec3, d: &Vec3, limit: f64) -> Option<f64> {
        if d.z >= 0.0 && o.z > self.max_height {
            return None;
        }
        match g {
            Heightfield::Plane { z0, gradient } => {
                let num = z0 + gradient[0] * o.x + gradient[1] * o.y - o.z;
                let den = d.z - gradient[0] * d.x - gradient[1] * d.y;
                if num > 0.0 {
                    // Origin below the surface.
                    return None;
                }
                if den >= 0.0 {
                    return None;
                }
                let t = num / den;
                (t > 0.0 && t <= limit).then_some(t)
            }
            Heightfield::Grid { .. } => {
                let f = |t: f64| o.z + t * d.z - g.height(o.x + t * d.x, o.y + t * d.y);
                let mut fr = f(0.0);
                if fr <= 0.0 {
                    return None;
                }
                let rate = (-d.z).max(0.0) + self.lipschitz * d.x.hypot(d.y);
                if rate <= 0.0 {
                    return None;
                }
                let mut r = 0.0;
                loop {
                    let next = r + (fr / rate).max(0.02);
                    if next > limit {
                        // Check the end point so a hit just before the limit counts.
                        if r < limit && f(limit) <= 0.0 {
                            return Some(bisect(&f, r, limit));
                        }
                        return None;
                    }
                    let fn_ = f(next);
                    if fn_ <= 0.0 {
                        return Some(bisect(&f, r, next));
                    }
                    r = next;
                    fr = fn_;
                }
            }
        }
    }

    /// One sweep starting at `start_t`. Each azimuth column uses the pose at
    /// its own timestamp; points are azimuth-major.
    pub fn scan<P: PoseSource + ?Sized, R: RngCore>(
        &self,
        poses: &P,
        start_t: f64,
        rng: &mut R,
    ) -> Result<LidarScanRecord, PoseError> {
        let n_az = self.lidar.azimuth_count as usize;
        let n_ch = self.lidar.channels as usize;
        let period = self.lidar.scan_period();
        let mount = Point3::from(self.lidar.mount_translation);
        let noise = (self.lidar.range_noise_std > 0.0)
            .then(|| Normal::new(0.0, self.lidar.range_noise_std).ok())
            .flatten();

        let first = poses.pose_at(start_t)?;
        let center = (first * mount).coords;
        // Objects reachable during this sweep; the margin covers vehicle motion.
        let reach = self.lidar.max_range + 10.0;
        let objects: Vec<&SceneObject> = self
            .scene
            .objects
            .iter()
            .filter(|o| {
                let c = o.shape.center();
                (c[0] - center.x).hypot(c[1] - center.y) <= reach + o.shape.footprint_radius()
            })
            .collect();

        let mut points = Vec::new();
        for a in 0..n_az {
            let t = start_t + a as f64 * period / n_az as f64;
            let pose = poses.pose_at(t)?;
            let o = (pose * mount).coords;
            for local in &self.rays[a * n_ch..(a + 1) * n_ch] {
                let d = pose.rotation * local;
                let Some((mut range, rho)) = self.cast(&o, &d, &objects) else {
                    continue;
                };
                if let Some(n) = &noise {
                    range = (range + n.sample(rng)).max(0.0);
                }
                let p = local * range;
                points.push(LidarPoint {
                    t,
                    position: [p.x as f32, p.y as f32, p.z as f32],
                    intensity: rho.clamp(0.0, 1.0) as f32,
                });
            }
        }
        Ok(LidarScanRecord { start_t, points })
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..60 {
        if hi - lo < 1e-6 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// One lidar sweep starting at `start_t`.
pub fn simulate_lidar_scan<P: PoseSource + ?Sized, R: RngCore>(
    scene: &Scene,
    poses: &P,
    start_t: f64,
    lidar: &LidarConfig,
    rng: &mut R,
) -> Result<LidarScanRecord, PoseError> {
    LidarSimulator::new(scene, lidar).scan(poses, start_t, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Shape;

    #[test]
    fn flat_ground_hit_distance() {
        let scene = Scene::new([[-100.0, -100.0], [100.0, 100.0]], Some(Heightfield::flat(0.0)));
        let cfg = LidarConfig::default();
        let sim = LidarSimulator::new(&scene, &cfg);
        // 1 m high, pointing down at atan(1/5): hits the ground 5 m ahead.
        let o = Vec3::new(0.0, 0.0, 1.0);
        let d = Vec3::new(5.0, 0.0, -1.0).normalize();
        let (t, rho) = sim.cast(&o, &d, &[]).unwrap();
        assert!((t - 26f64.sqrt()).abs() < 1e-9);
        assert_eq!(rho, 0.5);
    }

    #[test]
    fn far_wall_out_of_range() {
        let wall = SceneObject::new(
            Shape::Box {
                center: [60.5, 0.0],
                base_z: 0.0,
                size: [1.0, 10.0, 5.0],
                yaw: 0.0,
            },
            0.9,
            0.0,
        );
        let scene = Scene::new([[-100.0, -100.0], [100.0, 100.0]], None).with_object(wall);
        let cfg = LidarConfig::default();
        let sim = LidarSimulator::new(&scene, &cfg);
        let objs: Vec<&SceneObject> = scene.objects.iter().collect();
        let o = Vec3::new(0.0, 0.0, 1.0);
        assert!(sim.cast(&o, &Vec3::new(1.0, 0.0, 0.0), &objs).is_none());
    }
}
