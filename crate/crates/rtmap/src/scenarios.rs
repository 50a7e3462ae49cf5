//! Built-in scenes and run setups used by the presets and the acceptance
//! suite.

use std::f64::consts::{PI, TAU};

use rtmap_core::eval::ObjectBounds;
use rtmap_core::sim::{Heightfield, Scene, SceneObject, Shape, TrajectorySpec};

use crate::config::PipelineConfig;

/// A scene, a path through it, the configuration to run it with and,
/// optionally, the object whose detection range matters.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub scene: Scene,
    pub trajectory: TrajectorySpec,
    pub config: PipelineConfig,
    pub target: Option<ObjectBounds>,
}

fn bounds_of(shape: &Shape) -> ObjectBounds {
    let (min, max) = shape.footprint_aabb();
    ObjectBounds { min, max }
}

fn block(x: f64, y: f64, size: [f64; 3], yaw: f64, rho: f64) -> SceneObject {
    SceneObject::new(
        Shape::Box {
            center: [x, y],
            base_z: 0.0,
            size,
            yaw,
        },
        rho,
        0.0,
    )
}

/// Flat ground, a barrier, vegetation close in and reflectors scattered out to
/// 250 m around a vehicle that creeps forward for one second.
pub fn reference() -> Scenario {
    let mut scene = Scene::new([[-300.0, -300.0], [300.0, 300.0]], Some(Heightfield::flat(0.0)));

    let barrier = Shape::Box {
        center: [70.0, 0.0],
        base_z: 0.0,
        size: [0.6, 20.0, 3.0],
        yaw: 0.0,
    };
    scene.objects.push(SceneObject::new(barrier.clone(), 0.9, 0.0));

    // Reflectors on a golden-angle spiral from 30 m to 250 m.
    let golden = PI * (3.0 - 5f64.sqrt());
    let n = 45;
    for k in 0..n {
        let r = 30.0 + 220.0 * k as f64 / (n - 1) as f64;
        let bearing = 0.4 + golden * k as f64;
        // Keep the same angular width at every range: about three azimuths.
        let width = (r * 2.7f64.to_radians()).max(2.0);
        scene.objects.push(block(
            r * bearing.cos(),
            r * bearing.sin(),
            [2.0, width, 4.0],
            bearing,
            0.8,
        ));
    }
    // Vegetation: partly transparent to the radar, opaque to the lidar.
    for k in 0..8 {
        let a = TAU * k as f64 / 8.0 + 0.2;
        let r = 12.0 + 3.0 * k as f64;
        scene.objects.push(SceneObject::new(
            Shape::Cylinder {
                center: [r * a.cos(), r * a.sin()],
                base_z: 0.0,
                radius: 1.2,
                height: 1.5,
            },
            0.25,
            0.6,
        ));
    }

    Scenario {
        name: "reference",
        target: Some(bounds_of(&barrier)),
        scene,
        trajectory: TrajectorySpec::straight([0.0, 0.0], 0.0, 2.5, 20.0, 2.5),
        config: PipelineConfig::default(),
    }
}

/// Halves the lidar resolution on both axes to keep long runs fast. At 50 m
/// the beams are still about 0.6 m apart.
fn thin_lidar(config: &mut PipelineConfig) {
    config.lidar.channels = 64;
    config.lidar.azimuth_count = 512;
}

fn rolling(x: f64, y: f64) -> f64 {
    0.3 * (TAU * x / 40.0).sin() + 0.2 * (TAU * y / 55.0 + 1.0).sin()
}

/// Approach over rolling ground towards a 3 m barrier 150 m ahead.
///
/// The grid is stretched along the direction of travel so the barrier can
/// enter the map well before the lidar reaches it.
pub fn barrier_approach() -> Scenario {
    let min = [-150.0, -150.0];
    let max = [350.0, 150.0];
    let mut scene = Scene::new([min, max], Some(Heightfield::sample(min, max, 1.0, rolling)));
    let barrier = Shape::Box {
        center: [150.3, 0.0],
        base_z: -1.0,
        size: [0.6, 24.0, 4.0],
        yaw: 0.0,
    };
    scene.objects.push(SceneObject::new(barrier.clone(), 0.9, 0.0));

    let mut config = PipelineConfig::default();
    config.grid.dims = [640, 320, 64];
    config.radar.bin_count = 3000;
    thin_lidar(&mut config);
    Scenario {
        name: "barrier",
        target: Some(bounds_of(&barrier)),
        scene,
        trajectory: TrajectorySpec::straight([0.0, 0.0], 0.0, 140.0, 20.0, 2.5),
        config,
    }
}

fn undulating(x: f64, y: f64) -> f64 {
    0.45 * (TAU * x / 48.0).sin()
        + 0.3 * (TAU * y / 37.0 + 0.7).sin()
        + 0.2 * (TAU * (x + y) / 29.0).sin()
}

/// A 60 s traverse over undulating open ground with no objects.
pub fn undulating_traverse() -> Scenario {
    undulating_with(0.4, 2.5)
}

/// The undulating traverse with the relief scaled by `scale`, driven at
/// `speed` for 60 s.
pub fn undulating_with(scale: f64, speed: f64) -> Scenario {
    let min = [-160.0, -160.0];
    let max = [160.0, 160.0];
    let scene = Scene::new(
        [min, max],
        Some(Heightfield::sample(min, max, 1.0, |x, y| scale * undulating(x, y))),
    );
    // Gentle S-curve centred on the origin.
    let length = 60.0 * speed;
    let mut waypoints = Vec::new();
    let n = 60;
    let mut p = [-0.48 * length, 0.0];
    waypoints.push(p);
    let step = length / n as f64;
    for k in 0..n {
        let heading = 0.35 * (TAU * (k as f64 + 0.5) / n as f64).sin();
        p = [p[0] + step * heading.cos(), p[1] + step * heading.sin()];
        waypoints.push(p);
    }
    let mut config = PipelineConfig::default();
    // Enough range to cover the grid corners.
    config.radar.bin_count = 1700;
    thin_lidar(&mut config);
    Scenario {
        name: "undulating",
        scene,
        trajectory: TrajectorySpec::new(waypoints, speed),
        config,
        target: None,
    }
}

/// A short drive on flat ground used for quick end-to-end runs.
pub fn smoke() -> Scenario {
    let mut scene = Scene::new([[-100.0, -100.0], [100.0, 100.0]], Some(Heightfield::flat(0.0)));
    let post = Shape::Box {
        center: [25.0, 3.0],
        base_z: 0.0,
        size: [1.0, 4.0, 2.5],
        yaw: 0.0,
    };
    scene.objects.push(SceneObject::new(post.clone(), 0.9, 0.0));
    let mut config = PipelineConfig::default();
    config.radar.bin_count = 800;
    config.lidar.channels = 32;
    config.lidar.azimuth_count = 256;
    config.grid.dims = [128, 128, 32];
    Scenario {
        name: "smoke",
        target: Some(bounds_of(&post)),
        scene,
        trajectory: TrajectorySpec::straight([0.0, 0.0], 0.0, 5.0, 20.0, 2.5),
        config,
    }
}

pub fn all() -> Vec<Scenario> {
    vec![reference(), barrier_approach(), undulating_traverse(), smoke()]
}
