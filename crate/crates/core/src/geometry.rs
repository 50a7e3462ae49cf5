//! Thin aliases over `nalgebra` plus the few frame helpers shared by the
//! frontend and the simulator.

#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
/// Rigid transform from a body frame into the world frame.
pub type Pose = Isometry3<f64>;

pub fn pose_from_parts(position: Vec3, orientation: UnitQuaternion<f64>) -> Pose {
    Isometry3::from_parts(Translation3::from(position), orientation)
}

/// Orientation from yaw, pitch, roll (Z-Y-X intrinsic). Positive pitch turns the
/// nose down.
pub fn orientation_ypr(yaw: f64, pitch: f64, roll: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_euler_angles(roll, pitch, yaw)
}

/// Direction of a beam at `azimuth` (counter-clockwise from body +x) pitched
/// down by `tilt`, expressed in the body frame.
pub fn beam_direction(azimuth: f64, tilt: f64) -> Vec3 {
    let (sa, ca) = azimuth.sin_cos();
    let (st, ct) = tilt.sin_cos();
    Vec3::new(ct * ca, ct * sa, -st)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use core::f64::consts::{PI, TAU};
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Horizontal bearing of a vector, radians counter-clockwise from world +x.
pub fn bearing(v: &Vec3) -> f64 {
    v.y.atan2(v.x)
}
