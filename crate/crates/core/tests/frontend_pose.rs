//! Pose interpolation and radar/lidar projection against hand-derived
//! geometry and brute-force filters.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use nalgebra::{Point3, UnitQuaternion, Vector4};
use proptest::prelude::*;
use rtmap_core::frontend::{
    bin_to_range, lidar_to_points, scan_to_points, scan_to_points_with, sensor_origin,
    threshold_scan,
};
use rtmap_core::geometry::orientation_ypr;
use rtmap_core::pose::interpolate_pose;
use rtmap_core::{
    LidarConfig, LidarPoint, LidarScanRecord, Odometry, OdometrySample, Pose, RadarConfig,
    RadarScanRecord, Vec3,
};

fn sample(t: f64, p: [f64; 3], q: UnitQuaternion<f64>) -> OdometrySample {
    OdometrySample {
        t,
        position: Vec3::from(p),
        orientation: q,
    }
}

/// Textbook slerp on raw 4-vectors, shortest arc.
fn slerp_oracle(a: [f64; 4], b: [f64; 4], u: f64) -> [f64; 4] {
    let va = Vector4::from(a);
    let mut vb = Vector4::from(b);
    let mut dot = va.dot(&vb);
    if dot < 0.0 {
        vb = -vb;
        dot = -dot;
    }
    let theta = dot.min(1.0).acos();
    if theta < 1e-9 {
        return a;
    }
    let v = va * (((1.0 - u) * theta).sin() / theta.sin()) + vb * ((u * theta).sin() / theta.sin());
    [v[0], v[1], v[2], v[3]]
}

fn wxyz(q: &UnitQuaternion<f64>) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

#[test]
fn midpoint_of_quarter_turn_is_eighth_turn() {
    let a = sample(0.0, [0.0; 3], orientation_ypr(0.0, 0.0, 0.0));
    let b = sample(1.0, [2.0, 0.0, 0.0], orientation_ypr(FRAC_PI_2, 0.0, 0.0));
    let pose = interpolate_pose(&[a, b], 0.5).unwrap();
    let o = slerp_oracle(wxyz(&a.orientation), wxyz(&b.orientation), 0.5);
    let got = wxyz(&pose.rotation);
    for k in 0..4 {
        assert!((got[k] - o[k]).abs() < 1e-12);
    }
    // Yaw from the oracle quaternion, w and z only for a pure yaw.
    let yaw = 2.0 * o[3].atan2(o[0]);
    assert!((yaw - FRAC_PI_4).abs() < 1e-12);
    assert!((pose.translation.vector - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
}

#[test]
fn exact_timestamp_returns_sample() {
    let s = [
        sample(0.0, [0.0; 3], orientation_ypr(0.1, 0.0, 0.0)),
        sample(0.5, [1.0, 2.0, 3.0], orientation_ypr(0.7, 0.1, -0.2)),
        sample(1.0, [2.0, 2.0, 2.0], orientation_ypr(1.2, 0.0, 0.0)),
    ];
    let p = interpolate_pose(&s, 0.5).unwrap();
    assert_eq!(p, s[1].pose());
    assert!(interpolate_pose(&s, 1.0 + 1e-9).is_err());
    assert!(interpolate_pose(&s, -1e-9).is_err());
}

fn odometry_strategy() -> impl Strategy<Value = Vec<OdometrySample>> {
    prop::collection::vec(
        (0.1f64..0.5, -2.0f64..2.0, -2.0f64..2.0, -0.5f64..0.5, -3.2f64..3.2, -0.5f64..0.5, -0.5f64..0.5),
        2..8,
    )
    .prop_map(|rows| {
        // A random walk at vehicle-like speeds (under 50 m/s).
        let (mut t, mut p) = (0.0, [0.0; 3]);
        rows.into_iter()
            .map(|(dt, dx, dy, dz, yaw, pitch, roll)| {
                t += dt;
                p = [p[0] + dx, p[1] + dy, p[2] + dz];
                sample(t, p, orientation_ypr(yaw, pitch, roll))
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn interpolation_is_continuous_and_unit(s in odometry_strategy(), u in 0.0f64..1.0) {
        let (t0, t1) = (s[0].t, s[s.len() - 1].t);
        let t = (t0 + u * (t1 - t0)).min(t1 - 2e-6);
        let a = interpolate_pose(&s, t).unwrap();
        let b = interpolate_pose(&s, t + 1e-6).unwrap();
        prop_assert!((a.translation.vector - b.translation.vector).norm() < 1e-4);
        prop_assert!((a.rotation.quaternion().norm() - 1.0).abs() < 1e-9);
        prop_assert!(a.rotation.angle_to(&b.rotation) < 1e-4);
    }

    #[test]
    fn interpolation_matches_slerp_oracle(s in odometry_strategy(), u in 0.0f64..1.0) {
        let k = s.len() - 2;
        let (a, b) = (&s[k], &s[k + 1]);
        let t = a.t + u * (b.t - a.t);
        let p = interpolate_pose(&s, t).unwrap();
        let w = (t - a.t) / (b.t - a.t);
        let o = slerp_oracle(wxyz(&a.orientation), wxyz(&b.orientation), w);
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(o[0], o[1], o[2], o[3]));
        prop_assert!(p.rotation.angle_to(&q) < 1e-9);
        let pos = a.position + (b.position - a.position) * w;
        prop_assert!((p.translation.vector - pos).norm() < 1e-9);
    }
}

#[test]
fn bin_centres() {
    let cfg = RadarConfig {
        bin_count: 1000,
        ..RadarConfig::default()
    };
    assert!((bin_to_range(0, &cfg).unwrap() - 0.022).abs() < 1e-12);
    assert!((bin_to_range(227, &cfg).unwrap() - 227.5 * 0.044).abs() < 1e-12);
    assert!(bin_to_range(1000, &cfg).is_err());
}

fn one_detection_scan(bin: usize, value: f32) -> RadarScanRecord {
    let mut scan = RadarScanRecord::new(0.0, 0.044, 400);
    let mut row = vec![0.0f32; 400];
    for a in 0..400 {
        row[bin] = if a == 0 { value } else { 0.0 };
        scan.push_azimuth(a as f64 * 0.25 / 400.0, a as f64 * TAU / 400.0, &row);
    }
    scan
}

fn radar_cfg(tilt: f64, mount_z: f64) -> RadarConfig {
    RadarConfig {
        bin_count: 400,
        mount_translation: [0.0, 0.0, mount_z],
        mount_tilt: tilt,
        ..RadarConfig::default()
    }
}

#[test]
fn level_detection_lands_on_axis() {
    let scan = one_detection_scan(227, 0.9);
    let pts = scan_to_points(&scan, &radar_cfg(0.0, 1.2), &Pose::identity()).unwrap();
    assert_eq!(pts.len(), 1);
    assert!((pts[0].position - Vec3::new(10.01, 0.0, 1.2)).norm() < 1e-9);
}

#[test]
fn tilt_lowers_and_shortens() {
    let scan = one_detection_scan(227, 0.9);
    let tilt = 2.5f64.to_radians();
    let pts = scan_to_points(&scan, &radar_cfg(tilt, 1.2), &Pose::identity()).unwrap();
    let r = 227.5 * 0.044;
    let want = Vec3::new(r * tilt.cos(), 0.0, 1.2 - r * tilt.sin());
    assert!((pts[0].position - want).norm() < 1e-9);
    assert!((1.2 - pts[0].position.z - 0.4367).abs() < 1e-4);
}

#[test]
fn motion_is_compensated_per_azimuth() {
    // Vehicle moving at 1 m/s along x; detection half a rotation into the sweep.
    let odo = Odometry::new(vec![
        sample(0.0, [0.0; 3], UnitQuaternion::identity()),
        sample(1.0, [1.0, 0.0, 0.0], UnitQuaternion::identity()),
    ])
    .unwrap();
    let mut scan = RadarScanRecord::new(0.0, 0.044, 400);
    for a in 0..400 {
        let mut row = vec![0.0f32; 400];
        if a == 200 {
            row[227] = 0.9;
        }
        scan.push_azimuth(a as f64 * 0.25 / 400.0, a as f64 * TAU / 400.0, &row);
    }
    let cfg = radar_cfg(0.0, 0.0);
    let moving = scan_to_points(&scan, &cfg, &odo).unwrap();
    let frozen = scan_to_points(&scan, &cfg, &Pose::identity()).unwrap();
    assert!((moving[0].t - 0.125).abs() < 1e-12);
    assert!((moving[0].position.x - frozen[0].position.x - 0.125).abs() < 1e-9);
}

#[test]
fn threshold_boundary_is_inclusive() {
    let scan = one_detection_scan(10, 0.31);
    assert_eq!(threshold_scan(&scan, 0.26).unwrap().len(), 1);
    assert_eq!(threshold_scan(&scan, 0.31).unwrap().len(), 1);
    let quiet = one_detection_scan(10, 0.1);
    assert!(threshold_scan(&quiet, 0.26).unwrap().iter().all(|d| d.intensity >= 0.26));
    assert!(threshold_scan(&quiet, 0.26).unwrap().is_empty());
}

fn scan_strategy() -> impl Strategy<Value = RadarScanRecord> {
    (1usize..12, 1usize..40).prop_flat_map(|(az, bins)| {
        prop::collection::vec(0.0f32..=1.0, az * bins).prop_map(move |v| {
            let mut s = RadarScanRecord::new(0.0, 0.044, bins);
            for a in 0..az {
                s.push_azimuth(a as f64 * 0.01, a as f64 * 0.3, &v[a * bins..(a + 1) * bins]);
            }
            s
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn threshold_equals_brute_force(scan in scan_strategy(), thr in 0.01f64..0.99) {
        let got: Vec<(usize, usize, f32)> =
            threshold_scan(&scan, thr).unwrap().iter().map(|d| (d.azimuth, d.bin, d.intensity)).collect();
        let mut want = Vec::new();
        for a in 0..scan.azimuth_count() {
            for b in 0..scan.bin_count() {
                let v = scan.row(a)[b];
                if v >= thr as f32 {
                    want.push((a, b, v));
                }
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn higher_threshold_keeps_a_subset(scan in scan_strategy(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let low: Vec<(usize, usize)> = threshold_scan(&scan, lo).unwrap().iter().map(|d| (d.azimuth, d.bin)).collect();
        for d in threshold_scan(&scan, hi).unwrap() {
            prop_assert!(low.contains(&(d.azimuth, d.bin)));
        }
    }

    #[test]
    fn point_range_equals_bin_centre(
        scan in scan_strategy(), odo in odometry_strategy(), tilt in -0.3f64..0.3,
        mount in prop::array::uniform3(-1.0f64..1.0),
    ) {
        // Fit the sweep inside the odometry span.
        let (t0, t1) = (odo[0].t, odo[odo.len() - 1].t);
        let mut s = RadarScanRecord::new(t0, scan.bin_size, scan.bin_count());
        let n = scan.azimuth_count();
        for a in 0..n {
            s.push_azimuth(t0 + (t1 - t0) * a as f64 / n as f64, scan.azimuth_angle(a), scan.row(a));
        }
        let odo = Odometry::new(odo).unwrap();
        let cfg = RadarConfig { mount_tilt: tilt, mount_translation: mount, bin_count: s.bin_count() as u32, ..RadarConfig::default() };
        let dets = threshold_scan(&s, 0.26).unwrap();
        let pts = scan_to_points_with(&s, &cfg, 0.26, &odo).unwrap();
        prop_assert_eq!(pts.len(), dets.len());
        for (p, d) in pts.iter().zip(&dets) {
            let o = sensor_origin(&odo, mount, p.t).unwrap();
            let want = bin_to_range(d.bin, &cfg).unwrap();
            prop_assert!(((p.position - o).norm() - want).abs() < 1e-6);
            prop_assert!(p.intensity >= 0.26);
        }
    }

    #[test]
    fn identity_pose_is_plain_polar_transform(scan in scan_strategy(), tilt in -0.3f64..0.3) {
        let cfg = RadarConfig { mount_tilt: tilt, mount_translation: [0.3, -0.1, 1.5], bin_count: scan.bin_count() as u32, ..RadarConfig::default() };
        let pts = scan_to_points_with(&scan, &cfg, 0.26, &Pose::identity()).unwrap();
        let mut k = 0;
        for a in 0..scan.azimuth_count() {
            let th = scan.azimuth_angle(a);
            for b in 0..scan.bin_count() {
                if scan.row(a)[b] < 0.26f32 {
                    continue;
                }
                let r = (b as f64 + 0.5) * 0.044;
                let want = Vec3::new(
                    0.3 + r * tilt.cos() * th.cos(),
                    -0.1 + r * tilt.cos() * th.sin(),
                    1.5 - r * tilt.sin(),
                );
                prop_assert!((pts[k].position - want).norm() < 1e-9);
                k += 1;
            }
        }
        prop_assert_eq!(k, pts.len());
    }

    #[test]
    fn lidar_points_follow_matrix_oracle(
        odo in odometry_strategy(),
        raw in prop::collection::vec((0.0f64..1.0, prop::array::uniform3(-30.0f32..30.0), 0.0f32..=1.0), 0..60),
    ) {
        let (t0, t1) = (odo[0].t, odo[odo.len() - 1].t);
        let scan = LidarScanRecord {
            start_t: t0,
            points: raw.iter().map(|&(u, p, i)| LidarPoint { t: t0 + u * (t1 - t0), position: p, intensity: i }).collect(),
        };
        let cfg = LidarConfig { mount_translation: [0.2, 0.0, 1.8], ..LidarConfig::default() };
        let samples = odo.clone();
        let odo = Odometry::new(odo).unwrap();
        let pts = lidar_to_points(&scan, &cfg, &odo).unwrap();
        prop_assert_eq!(pts.len(), scan.points.len());
        for (p, lp) in pts.iter().zip(&scan.points) {
            let m = interpolate_pose(&samples, lp.t).unwrap().to_homogeneous();
            let local = nalgebra::Vector4::new(
                0.2 + lp.position[0] as f64,
                lp.position[1] as f64,
                1.8 + lp.position[2] as f64,
                1.0,
            );
            let w = m * local;
            prop_assert!((p.position - Vec3::new(w[0], w[1], w[2])).norm() < 1e-9);
            prop_assert_eq!(p.t, lp.t);
        }
    }
}

#[test]
fn stationary_lidar_adds_mount_offset() {
    let scan = LidarScanRecord {
        start_t: 0.0,
        points: vec![
            LidarPoint { t: 0.0, position: [1.0, 2.0, -0.5], intensity: 0.4 },
            LidarPoint { t: 0.01, position: [-3.0, 0.0, 0.0], intensity: 0.9 },
        ],
    };
    let cfg = LidarConfig { mount_translation: [0.5, 0.0, 2.0], ..LidarConfig::default() };
    let pts = lidar_to_points(&scan, &cfg, &Pose::identity()).unwrap();
    assert_eq!(pts.len(), 2);
    assert!((pts[0].position - Vec3::new(1.5, 2.0, 1.5)).norm() < 1e-12);
    let o = sensor_origin(&Pose::identity(), cfg.mount_translation, 0.0).unwrap();
    assert!((o - Point3::new(0.5, 0.0, 2.0).coords).norm() < 1e-12);
}
