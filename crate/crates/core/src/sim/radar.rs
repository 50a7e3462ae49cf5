//! Cone-model radar.
//!
//! Each azimuth carries a scalar energy that starts at 1. Walking outwards in
//! range, every object the cone meets returns `reflectivity * occupancy *
//! energy` in the bin where it is entered and lets `1 - occupancy * (1 -
//! transmissivity)` of the energy through. Occupancy is the fraction of the
//! cone cross-section the object covers: its angular overlap with the
//! azimuth beamwidth times its vertical overlap with the beam window.
//!
//! The tilted beam axis eventually meets the terrain. That bin returns
//! `ground_reflectivity * energy` and the remaining energy travels on along
//! the surface, so past the touchdown the vertical window is the band of one
//! beam height resting on the ground rather than the band around the axis.
//! Gaussian noise is added to every bin and the result clipped to `[0, 1]`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::Point3;
use rand_chacha::rand_core::RngCore;
use rand_distr::{Distribution, Normal};

use super::scene::{overlap, Heightfield, Scene};
use super::SimConfig;
use crate::config::RadarConfig;
use crate::error::PoseError;
use crate::geometry::{beam_direction, Vec3};
use crate::pose::PoseSource;
use crate::scan::RadarScanRecord;

/// One noise-free return: signal added to a range bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Return {
    pub bin: usize,
    pub signal: f64,
}

/// Precomputed per-scene data for repeated scans.
#[derive(Debug, Clone)]
pub struct RadarSimulator<'a> {
    scene: &'a Scene,
    radar: &'a RadarConfig,
    sim: &'a SimConfig,
    lipschitz: f64,
}

impl<'a> RadarSimulator<'a> {
    pub fn new(scene: &'a Scene, radar: &'a RadarConfig, sim: &'a SimConfig) -> Self {
        let lipschitz = scene.ground.as_ref().map_or(0.0, Heightfield::lipschitz);
        Self {
            scene,
            radar,
            sim,
            lipschitz,
        }
    }

    /// Noise-free returns of one azimuth, ordered by range.
    pub fn returns(&self, origin: &Vec3, dir: &Vec3) -> Vec<Return> {
        let bin_size = self.radar.bin_size;
        let max_range = self.radar.max_range();
        let hn = d_horizontal(dir);
        if hn < 1e-12 {
            return Vec::new();
        }
        let u = [dir.x / hn, dir.y / hn];
        let bearing = dir.y.atan2(dir.x);
        let half_az = 0.5 * TAU / self.radar.azimuth_count as f64;
        let tan_half_el = (0.5 * self.sim.elevation_beamwidth).tan();

        let touchdown = self
            .scene
            .ground
            .as_ref()
            .and_then(|g| self.touchdown(g, origin, dir, max_range));

        // (range, reflectivity, occupancy, transmissivity)
        let mut events: Vec<(f64, f64, f64, f64)> = Vec::new();
        for obj in &self.scene.objects {
            let shape = &obj.shape;
            // Quick reject on the footprint's bounding circle.
            let c = shape.center();
            let dx = c[0] - origin.x;
            let dy = c[1] - origin.y;
            let along = dx * u[0] + dy * u[1];
            let fr = shape.footprint_radius();
            if along + fr < 0.0 || (along - fr) / hn > max_range {
                continue;
            }
            let Some((lo, hi)) = shape.angular_extent([origin.x, origin.y], bearing) else {
                continue;
            };
            let a0 = lo.max(-half_az);
            let a1 = hi.min(half_az);
            if a1 <= a0 {
                continue;
            }
            let az_frac = (a1 - a0) / (2.0 * half_az);
            let psi = bearing + 0.5 * (a0 + a1);
            let (s, co) = psi.sin_cos();
            let Some((h_in, _)) = shape.ray_interval_2d([origin.x, origin.y], [co, s]) else {
                continue;
            };
            if h_in <= 0.0 {
                continue;
            }
            let r = h_in / hn;
            if r >= max_range {
                continue;
            }
            let half = r * tan_half_el;
            let (z0, z1) = shape.z_range();
            let window = match (touchdown, &self.scene.ground) {
                (Some(td), Some(g)) if r > td => {
                    let gz = g.height(origin.x + h_in * co, origin.y + h_in * s);
                    (gz, gz + 2.0 * half)
                }
                _ => {
                    let axis = origin.z + r * dir.z;
                    (axis - half, axis + half)
                }
            };
            let el_frac = overlap(z0, z1, window.0, window.1) / (2.0 * half);
            let occ = az_frac * el_frac.min(1.0);
            if occ > 0.0 {
                events.push((r, obj.reflectivity, occ, obj.transmissivity));
            }
        }
        if let Some(td) = touchdown {
            // Full occupancy, everything not returned continues along the ground.
            events.push((td, self.scene.ground_reflectivity, 1.0, 1.0 - self.scene.ground_reflectivity));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut energy = 1.0;
        let mut out: Vec<Return> = Vec::new();
        for (r, rho, occ, tau) in events {
            let bin = (r / bin_size) as usize;
            if bin >= self.radar.bin_count as usize {
                continue;
            }
            let signal = rho * occ * energy;
            energy *= 1.0 - occ * (1.0 - tau);
            if signal <= 0.0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.bin == bin => last.signal += signal,
                _ => out.push(Return { bin, signal }),
            }
        }
        out
    }

    /// Range at which the beam axis first reaches the terrain.
    fn touchdown(&self, g: &Heightfield, o: &Vec3, d: &Vec3, max_range: f64) -> Option<f64> {
        let f = |r: f64| o.z + r * d.z - g.height(o.x + r * d.x, o.y + r * d.y);
        let f0 = f(0.0);
        if f0 <= 0.0 {
            return Some(0.0);
        }
        let hn = d_horizontal(d);
        let rate = (-d.z).max(0.0) + self.lipschitz * hn;
        if rate <= 0.0 {
            return None;
        }
        if d.z >= 0.0 && o.z > g.max_height() {
            return None;
        }
        let min_step = self.radar.bin_size;
        let mut r = 0.0;
        let mut fr = f0;
        loop {
            let step = (fr / rate).max(min_step);
            let next = r + step;
            if next > max_range {
                return None;
            }
            let fn_ = f(next);
            if fn_ <= 0.0 {
                // Bisect the bracket [r, next].
                let (mut lo, mut hi) = (r, next);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-6 {
                        break;
                    }
                }
                return Some(hi);
            }
            r = next;
            fr = fn_;
        }
    }

    /// Beam origin and axis direction of azimuth `angle` at a pose.
    pub fn beam<P: PoseSource + ?Sized>(
        &self,
        poses: &P,
        t: f64,
        angle: f64,
    ) -> Result<(Vec3, Vec3), PoseError> {
        let pose = poses.pose_at(t)?;
        let origin = (pose * Point3::from(self.radar.mount_translation)).coords;
        let dir = pose.rotation * beam_direction(angle, self.radar.mount_tilt);
        Ok((origin, dir))
    }

    /// Timestamp and angle of azimuth `a` for a sweep starting at `start_t`.
    pub fn azimuth(&self, start_t: f64, a: usize) -> (f64, f64) {
        let n = self.radar.azimuth_count as f64;
        (
            start_t + a as f64 * self.radar.rotation_period / n,
            a as f64 * TAU / n,
        )
    }

    /// Noise-free returns of every azimuth of one sweep.
    pub fn ideal_scan<P: PoseSource + ?Sized>(
        &self,
        poses: &P,
        start_t: f64,
    ) -> Result<Vec<Vec<Return>>, PoseError> {
        (0..self.radar.azimuth_count as usize)
            .map(|a| {
                let (t, angle) = self.azimuth(start_t, a);
                let (o, d) = self.beam(poses, t, angle)?;
                Ok(self.returns(&o, &d))
            })
            .collect()
    }

    /// One noisy sweep.
    pub fn scan<P: PoseSource + ?Sized, R: RngCore>(
        &self,
        poses: &P,
        start_t: f64,
        rng: &mut R,
    ) -> Result<RadarScanRecord, PoseError> {
        let n = self.radar.azimuth_count as usize;
        let bins = self.radar.bin_count as usize;
        let noise = Normal::new(self.sim.noise_mean, self.sim.noise_std)
            .unwrap_or_else(|_| Normal::new(self.sim.noise_mean, 0.0).unwrap());
        let mut rec = RadarScanRecord::with_capacity(start_t, self.radar.bin_size, bins, n);
        let mut row = vec![0f32; bins];
        for a in 0..n {
            let (t, angle) = self.azimuth(start_t, a);
            let (o, d) = self.beam(poses, t, angle)?;
            let returns = self.returns(&o, &d);
            let mut next = returns.iter().peekable();
            for (b, v) in row.iter_mut().enumerate() {
                let mut x = noise.sample(rng);
                if let Some(r) = next.peek() {
                    if r.bin == b {
                        x += r.signal;
                        next.next();
                    }
                }
                *v = x.clamp(0.0, 1.0) as f32;
            }
            rec.push_azimuth(t, angle, &row);
        }
        Ok(rec)
    }
}

#[inline]
fn d_horizontal(d: &Vec3) -> f64 {
    d.x.hypot(d.y)
}

/// Noise-free returns along one beam.
pub fn azimuth_returns(
    scene: &Scene,
    radar: &RadarConfig,
    sim: &SimConfig,
    origin: &Vec3,
    dir: &Vec3,
) -> Vec<Return> {
    RadarSimulator::new(scene, radar, sim).returns(origin, dir)
}

/// Noise-free returns of every azimuth of one sweep.
pub fn simulate_radar_ideal<P: PoseSource + ?Sized>(
    scene: &Scene,
    poses: &P,
    start_t: f64,
    radar: &RadarConfig,
    sim: &SimConfig,
) -> Result<Vec<Vec<Return>>, PoseError> {
    RadarSimulator::new(scene, radar, sim).ideal_scan(poses, start_t)
}

/// One noisy sweep starting at `start_t`; each azimuth uses the pose at its
/// own timestamp.
pub fn simulate_radar_scan<P: PoseSource + ?Sized, R: RngCore>(
    scene: &Scene,
    poses: &P,
    start_t: f64,
    radar: &RadarConfig,
    sim: &SimConfig,
    rng: &mut R,
) -> Result<RadarScanRecord, PoseError> {
    RadarSimulator::new(scene, radar, sim).scan(poses, start_t, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::sim::{SceneObject, Shape};

    fn radar() -> RadarConfig {
        RadarConfig {
            bin_count: 1200,
            ..RadarConfig::default()
        }
    }

    fn wall(x: f64) -> SceneObject {
        SceneObject::new(
            Shape::Box {
                center: [x + 0.5, 0.0],
                base_z: -5.0,
                size: [1.0, 20.0, 10.0],
                yaw: 0.0,
            },
            0.9,
            0.0,
        )
    }

    #[test]
    fn wall_then_shadow() {
        let scene = Scene::new([[-100.0, -100.0], [100.0, 100.0]], None).with_object(wall(10.0));
        let r = radar();
        let sim = SimConfig::default();
        let o = Vec3::new(0.0, 0.0, 1.0);
        let d = beam_direction(0.0, r.mount_tilt);
        let ret = azimuth_returns(&scene, &r, &sim, &o, &d);
        assert_eq!(ret.len(), 1);
        assert!((ret[0].signal - 0.9).abs() < 1e-12);
        let expected = (10.0 / r.mount_tilt.cos() / r.bin_size) as usize;
        assert_eq!(ret[0].bin, expected);
        let _ = Pose::identity();
    }

    #[test]
    fn flat_ground_touchdown() {
        let scene = Scene::new([[-100.0, -100.0], [100.0, 100.0]], Some(Heightfield::flat(0.0)));
        let r = radar();
        let sim = SimConfig::default();
        let o = Vec3::new(0.0, 0.0, 1.0);
        let d = beam_direction(0.3, r.mount_tilt);
        let ret = azimuth_returns(&scene, &r, &sim, &o, &d);
        assert_eq!(ret.len(), 1);
        let td = 1.0 / r.mount_tilt.sin();
        assert_eq!(ret[0].bin, (td / r.bin_size) as usize);
        assert!((ret[0].signal - 0.5).abs() < 1e-12);
    }
}
