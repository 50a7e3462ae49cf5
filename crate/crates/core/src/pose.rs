//! Odometry samples and time-interpolated poses.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Quaternion, UnitQuaternion};

use crate::error::PoseError;
use crate::geometry::{pose_from_parts, Pose, Vec3};

/// One timestamped vehicle pose in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometrySample {
    pub t: f64,
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

impl OdometrySample {
    /// Builds a sample from raw `(w, x, y, z)` quaternion components without
    /// renormalising them; [`Odometry::new`] checks the norm.
    pub fn from_raw(t: f64, position: [f64; 3], wxyz: [f64; 4]) -> Self {
        let q = Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
        Self {
            t,
            position: Vec3::from(position),
            orientation: UnitQuaternion::new_unchecked(q),
        }
    }

    pub fn pose(&self) -> Pose {
        pose_from_parts(self.position, self.orientation)
    }

    /// Quaternion components as `(w, x, y, z)`.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.w, q.i, q.j, q.k]
    }
}

/// Anything that can report the vehicle pose at a time.
pub trait PoseSource {
    fn pose_at(&self, t: f64) -> Result<Pose, PoseError>;
}

impl PoseSource for Pose {
    fn pose_at(&self, _t: f64) -> Result<Pose, PoseError> {
        Ok(*self)
    }
}

impl<P: PoseSource + ?Sized> PoseSource for &P {
    fn pose_at(&self, t: f64) -> Result<Pose, PoseError> {
        (**self).pose_at(t)
    }
}

/// A validated odometry stream: strictly increasing timestamps and unit
/// quaternions.
#[derive(Debug, Clone, PartialEq)]
pub struct Odometry {
    samples: Vec<OdometrySample>,
}

const QUAT_NORM_TOL: f64 = 1e-6;

impl Odometry {
    pub fn new(samples: Vec<OdometrySample>) -> Result<Self, PoseError> {
        if samples.is_empty() {
            return Err(PoseError::Empty);
        }
        for (index, s) in samples.iter().enumerate() {
            if !s.t.is_finite() || !s.position.iter().all(|v| v.is_finite()) {
                return Err(PoseError::InvalidSample {
                    index,
                    reason: "non-finite value".into(),
                });
            }
            let norm = s.orientation.quaternion().norm();
            if (norm - 1.0).abs() > QUAT_NORM_TOL {
                return Err(PoseError::InvalidSample {
                    index,
                    reason: format!("quaternion norm {norm} is not 1"),
                });
            }
            if index > 0 && s.t <= samples[index - 1].t {
                return Err(PoseError::InvalidSample {
                    index,
                    reason: "timestamps must be strictly increasing".into(),
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[OdometrySample] {
        &self.samples
    }

    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    pub fn interpolate(&self, t: f64) -> Result<Pose, PoseError> {
        interpolate_pose(&self.samples, t)
    }
}

impl PoseSource for Odometry {
    fn pose_at(&self, t: f64) -> Result<Pose, PoseError> {
        self.interpolate(t)
    }
}

/// Pose at `t` from an ordered sample list.
///
/// Position is interpolated linearly and orientation along the shortest
/// great-circle arc. A query that hits a sample timestamp returns that sample
/// unchanged.
pub fn interpolate_pose(samples: &[OdometrySample], t: f64) -> Result<Pose, PoseError> {
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(PoseError::Empty),
    };
    if !(t >= first.t && t <= last.t) {
        return Err(PoseError::Extrapolation {
            t,
            first: first.t,
            last: last.t,
        });
    }
    // First sample with timestamp >= t.
    let hi = samples.partition_point(|s| s.t < t);
    let b = &samples[hi];
    if b.t == t {
        return Ok(b.pose());
    }
    let a = &samples[hi - 1];
    let u = (t - a.t) / (b.t - a.t);
    let position = a.position + (b.position - a.position) * u;
    Ok(pose_from_parts(position, slerp_shortest(&a.orientation, &b.orientation, u)))
}

/// Spherical interpolation along the shorter arc, renormalised.
pub fn slerp_shortest(
    a: &UnitQuaternion<f64>,
    b: &UnitQuaternion<f64>,
    u: f64,
) -> UnitQuaternion<f64> {
    let qa = a.quaternion();
    let mut qb = *b.quaternion();
    let mut dot = qa.dot(&qb);
    if dot < 0.0 {
        qb = -qb;
        dot = -dot;
    }
    let q = if dot > 1.0 - 1e-12 {
        // Nearly identical: fall back to normalised lerp.
        qa * (1.0 - u) + qb * u
    } else {
        let theta = dot.min(1.0).acos();
        let s = theta.sin();
        qa * (((1.0 - u) * theta).sin() / s) + qb * ((u * theta).sin() / s)
    };
    UnitQuaternion::new_normalize(q)
}
