//! Parametric scenes: an optional ground heightfield plus vertical prisms.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use crate::error::ConfigError;
use crate::geometry::{wrap_angle, Vec3};

/// Terrain height as a function of world `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Heightfield {
    /// `z = z0 + gradient[0] * x + gradient[1] * y`.
    Plane {
        #[cfg_attr(feature = "serde", serde(default))]
        z0: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        gradient: [f64; 2],
    },
    /// Bilinear interpolation over nodes `origin + (i, j) * resolution`,
    /// stored row by row with `i` fastest. Outside the nodes the edge values
    /// extend outwards.
    Grid {
        origin: [f64; 2],
        resolution: f64,
        width: usize,
        height: usize,
        values: Vec<f64>,
    },
}

impl Heightfield {
    pub fn flat(z0: f64) -> Self {
        Heightfield::Plane {
            z0,
            gradient: [0.0, 0.0],
        }
    }

    /// Samples `f(x, y)` on a node grid covering `[min, max]`.
    pub fn sample<F: Fn(f64, f64) -> f64>(min: [f64; 2], max: [f64; 2], resolution: f64, f: F) -> Self {
        let width = ((max[0] - min[0]) / resolution).ceil() as usize + 1;
        let height = ((max[1] - min[1]) / resolution).ceil() as usize + 1;
        let mut values = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                values.push(f(
                    min[0] + i as f64 * resolution,
                    min[1] + j as f64 * resolution,
                ));
            }
        }
        Heightfield::Grid {
            origin: min,
            resolution,
            width,
            height,
            values,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Heightfield::Plane { z0, gradient } => {
                if !(z0.is_finite() && gradient.iter().all(|g| g.is_finite())) {
                    return Err(ConfigError::new("scene.ground", "plane must be finite"));
                }
            }
            Heightfield::Grid {
                origin,
                resolution,
                width,
                height,
                values,
            } => {
                if !(*resolution > 0.0 && resolution.is_finite()) {
                    return Err(ConfigError::new("scene.ground.resolution", "must be > 0"));
                }
                if *width < 2 || *height < 2 {
                    return Err(ConfigError::new(
                        "scene.ground",
                        "grid needs at least 2x2 nodes",
                    ));
                }
                if values.len() != width * height {
                    return Err(ConfigError::new(
                        "scene.ground.values",
                        format!("expected {} values, got {}", width * height, values.len()),
                    ));
                }
                if !values.iter().chain(origin.iter()).all(|v| v.is_finite()) {
                    return Err(ConfigError::new("scene.ground", "heightfield must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Grid cell and fractional position of `(x, y)`, clamped to the nodes.
    #[inline]
    fn locate(
        origin: &[f64; 2],
        resolution: f64,
        width: usize,
        height: usize,
        x: f64,
        y: f64,
    ) -> (usize, usize, f64, f64) {
        let fx = ((x - origin[0]) / resolution).clamp(0.0, (width - 1) as f64);
        let fy = ((y - origin[1]) / resolution).clamp(0.0, (height - 1) as f64);
        let i = (fx.floor() as usize).min(width - 2);
        let j = (fy.floor() as usize).min(height - 2);
        (i, j, fx - i as f64, fy - j as f64)
    }

    pub fn height(&self, x: f64, y: f64) -> f64 {
        match self {
            Heightfield::Plane { z0, gradient } => z0 + gradient[0] * x + gradient[1] * y,
            Heightfield::Grid {
                origin,
                resolution,
                width,
                height,
                values,
            } => {
                let (i, j, u, v) = Self::locate(origin, *resolution, *width, *height, x, y);
                let z00 = values[j * width + i];
                let z10 = values[j * width + i + 1];
                let z01 = values[(j + 1) * width + i];
                let z11 = values[(j + 1) * width + i + 1];
                let a = z00 + (z10 - z00) * u;
                let b = z01 + (z11 - z01) * u;
                a + (b - a) * v
            }
        }
    }

    /// Height gradient `(dz/dx, dz/dy)`; zero along axes clamped at the edge.
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        match self {
            Heightfield::Plane { gradient, .. } => *gradient,
            Heightfield::Grid {
                origin,
                resolution,
                width,
                height,
                values,
            } => {
                let (i, j, u, v) = Self::locate(origin, *resolution, *width, *height, x, y);
                let z00 = values[j * width + i];
                let z10 = values[j * width + i + 1];
                let z01 = values[(j + 1) * width + i];
                let z11 = values[(j + 1) * width + i + 1];
                let inside_x = x > origin[0] && x < origin[0] + (width - 1) as f64 * resolution;
                let inside_y = y > origin[1] && y < origin[1] + (height - 1) as f64 * resolution;
                let gx = ((z10 - z00) * (1.0 - v) + (z11 - z01) * v) / resolution;
                let gy = ((z01 - z00) * (1.0 - u) + (z11 - z10) * u) / resolution;
                [
                    if inside_x { gx } else { 0.0 },
                    if inside_y { gy } else { 0.0 },
                ]
            }
        }
    }

    /// Upper bound on the horizontal gradient norm.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Heightfield::Plane { gradient, .. } => gradient[0].hypot(gradient[1]),
            Heightfield::Grid {
                resolution,
                width,
                height,
                values,
                ..
            } => {
                let mut mx: f64 = 0.0;
                let mut my: f64 = 0.0;
                for j in 0..*height {
                    for i in 0..*width {
                        let z = values[j * width + i];
                        if i + 1 < *width {
                            mx = mx.max((values[j * width + i + 1] - z).abs());
                        }
                        if j + 1 < *height {
                            my = my.max((values[(j + 1) * width + i] - z).abs());
                        }
                    }
                }
                mx.hypot(my) / resolution
            }
        }
    }

    /// Highest terrain point, or infinity for a sloped plane.
    pub fn max_height(&self) -> f64 {
        match self {
            Heightfield::Plane { z0, gradient } => {
                if gradient == &[0.0, 0.0] {
                    *z0
                } else {
                    f64::INFINITY
                }
            }
            Heightfield::Grid { values, .. } => {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }
}

/// A vertical prism standing on `base_z`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Shape {
    /// Box with horizontal footprint `size[0] x size[1]` rotated by `yaw`
    /// about its centre, and height `size[2]`.
    Box {
        center: [f64; 2],
        base_z: f64,
        size: [f64; 3],
        #[cfg_attr(feature = "serde", serde(default))]
        yaw: f64,
    },
    Cylinder {
        center: [f64; 2],
        base_z: f64,
        radius: f64,
        height: f64,
    },
}

impl Shape {
    pub fn center(&self) -> [f64; 2] {
        match self {
            Shape::Box { center, .. } | Shape::Cylinder { center, .. } => *center,
        }
    }

    /// Vertical extent `(bottom, top)`.
    pub fn z_range(&self) -> (f64, f64) {
        match self {
            Shape::Box { base_z, size, .. } => (*base_z, base_z + size[2]),
            Shape::Cylinder { base_z, height, .. } => (*base_z, base_z + height),
        }
    }

    /// Radius of a circle around the centre containing the footprint.
    pub fn footprint_radius(&self) -> f64 {
        match self {
            Shape::Box { size, .. } => 0.5 * size[0].hypot(size[1]),
            Shape::Cylinder { radius, .. } => *radius,
        }
    }

    /// Axis-aligned horizontal bounds `(min, max)` of the footprint.
    pub fn footprint_aabb(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Shape::Box {
                center, size, yaw, ..
            } => {
                let (s, c) = yaw.sin_cos();
                let hx = 0.5 * (size[0] * c.abs() + size[1] * s.abs());
                let hy = 0.5 * (size[0] * s.abs() + size[1] * c.abs());
                ([center[0] - hx, center[1] - hy], [center[0] + hx, center[1] + hy])
            }
            Shape::Cylinder { center, radius, .. } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
        }
    }

    /// Whether the horizontal point lies inside the footprint.
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        match self {
            Shape::Box {
                center, size, yaw, ..
            } => {
                let (lx, ly) = to_local(center, *yaw, x, y);
                lx.abs() <= 0.5 * size[0] && ly.abs() <= 0.5 * size[1]
            }
            Shape::Cylinder { center, radius, .. } => {
                (x - center[0]).hypot(y - center[1]) <= *radius
            }
        }
    }

    /// Entry and exit parameters of the 2D ray `p + t * u` (unit `u`) through
    /// the footprint, if it hits.
    pub fn ray_interval_2d(&self, p: [f64; 2], u: [f64; 2]) -> Option<(f64, f64)> {
        match self {
            Shape::Box {
                center, size, yaw, ..
            } => {
                let (px, py) = to_local(center, *yaw, p[0], p[1]);
                let (s, c) = yaw.sin_cos();
                let ux = c * u[0] + s * u[1];
                let uy = -s * u[0] + c * u[1];
                slab2(px, py, ux, uy, 0.5 * size[0], 0.5 * size[1])
            }
            Shape::Cylinder { center, radius, .. } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let b = dx * u[0] + dy * u[1];
                let c = dx * dx + dy * dy - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                Some((-b - sq, -b + sq))
            }
        }
    }

    /// Bearing interval `(lo, hi)` of the footprint as seen from `p`, relative
    /// to `reference` and wrapped into `(-pi, pi]`. `None` when `p` is inside.
    pub fn angular_extent(&self, p: [f64; 2], reference: f64) -> Option<(f64, f64)> {
        if self.contains_xy(p[0], p[1]) {
            return None;
        }
        match self {
            Shape::Cylinder { center, radius, .. } => {
                let dx = center[0] - p[0];
                let dy = center[1] - p[1];
                let d = dx.hypot(dy);
                let mid = wrap_angle(dy.atan2(dx) - reference);
                let half = (radius / d).min(1.0).asin();
                Some((mid - half, mid + half))
            }
            Shape::Box {
                center, size, yaw, ..
            } => {
                let (s, c) = yaw.sin_cos();
                let mid = wrap_angle((center[1] - p[1]).atan2(center[0] - p[0]) - reference);
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                    let lx = sx * 0.5 * size[0];
                    let ly = sy * 0.5 * size[1];
                    let wx = center[0] + c * lx - s * ly - p[0];
                    let wy = center[1] + s * lx + c * ly - p[1];
                    // Unwrap around the centre bearing; a convex footprint
                    // seen from outside spans less than pi.
                    let a = mid + wrap_angle(wrap_angle(wy.atan2(wx) - reference) - mid);
                    lo = lo.min(a);
                    hi = hi.max(a);
                }
                Some((lo, hi))
            }
        }
    }

    /// Entry parameter of the 3D ray `o + t * d` into the solid, for `t > 0`.
    pub fn ray_entry_3d(&self, o: &Vec3, d: &Vec3) -> Option<f64> {
        let hn = d.x.hypot(d.y);
        let (zb, zt) = self.z_range();
        // Vertical slab in terms of t.
        let (mut t0, mut t1) = if d.z.abs() < 1e-15 {
            if o.z < zb || o.z > zt {
                return None;
            }
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            let a = (zb - o.z) / d.z;
            let b = (zt - o.z) / d.z;
            (a.min(b), a.max(b))
        };
        if hn < 1e-15 {
            if !self.contains_xy(o.x, o.y) {
                return None;
            }
        } else {
            let u = [d.x / hn, d.y / hn];
            let (h0, h1) = self.ray_interval_2d([o.x, o.y], u)?;
            t0 = t0.max(h0 / hn);
            t1 = t1.min(h1 / hn);
        }
        (t0 <= t1 && t0 > 1e-9).then_some(t0)
    }
}

fn to_local(center: &[f64; 2], yaw: f64, x: f64, y: f64) -> (f64, f64) {
    let (s, c) = yaw.sin_cos();
    let dx = x - center[0];
    let dy = y - center[1];
    (c * dx + s * dy, -s * dx + c * dy)
}

fn slab2(px: f64, py: f64, ux: f64, uy: f64, hx: f64, hy: f64) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (p, u, h) in [(px, ux, hx), (py, uy, hy)] {
        if u.abs() < 1e-15 {
            if p.abs() > h {
                return None;
            }
        } else {
            let a = (-h - p) / u;
            let b = (h - p) / u;
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// A scene primitive with radar material properties.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SceneObject {
    pub shape: Shape,
    /// Fraction of incident energy returned to the sensor.
    pub reflectivity: f64,
    /// Fraction of incident energy passing through; 0 is opaque.
    #[cfg_attr(feature = "serde", serde(default))]
    pub transmissivity: f64,
}

impl SceneObject {
    pub fn new(shape: Shape, reflectivity: f64, transmissivity: f64) -> Self {
        Self {
            shape,
            reflectivity,
            transmissivity,
        }
    }
}

fn default_ground_reflectivity() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scene {
    /// Horizontal extent `[min, max]` the vehicle must stay inside.
    pub bounds: [[f64; 2]; 2],
    #[cfg_attr(feature = "serde", serde(default))]
    pub ground: Option<Heightfield>,
    /// Reflectivity of the ground surface.
    #[cfg_attr(feature = "serde", serde(default = "default_ground_reflectivity"))]
    pub ground_reflectivity: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn new(bounds: [[f64; 2]; 2], ground: Option<Heightfield>) -> Self {
        Self {
            bounds,
            ground,
            ground_reflectivity: default_ground_reflectivity(),
            objects: Vec::new(),
        }
    }

    pub fn with_object(mut self, object: SceneObject) -> Self {
        self.objects.push(object);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let [min, max] = self.bounds;
        if !(min[0] < max[0] && min[1] < max[1]) {
            return Err(ConfigError::new("scene.bounds", "min must be below max"));
        }
        if let Some(g) = &self.ground {
            g.validate()?;
        }
        if !(0.0..=1.0).contains(&self.ground_reflectivity) {
            return Err(ConfigError::new(
                "scene.ground_reflectivity",
                "must lie in [0, 1]",
            ));
        }
        for o in &self.objects {
            let (rho, tau) = (o.reflectivity, o.transmissivity);
            if !((0.0..=1.0).contains(&rho) && (0.0..=1.0).contains(&tau) && rho + tau <= 1.0) {
                return Err(ConfigError::new(
                    "scene.objects",
                    format!("reflectivity {rho} and transmissivity {tau} need rho + tau <= 1"),
                ));
            }
            let ok = match &o.shape {
                Shape::Box {
                    center,
                    base_z,
                    size,
                    yaw,
                } => {
                    size.iter().all(|s| *s > 0.0 && s.is_finite())
                        && center.iter().all(|c| c.is_finite())
                        && base_z.is_finite()
                        && yaw.is_finite()
                }
                Shape::Cylinder {
                    center,
                    base_z,
                    radius,
                    height,
                } => {
                    *radius > 0.0
                        && *height > 0.0
                        && radius.is_finite()
                        && height.is_finite()
                        && center.iter().all(|c| c.is_finite())
                        && base_z.is_finite()
                }
            };
            if !ok {
                return Err(ConfigError::new(
                    "scene.objects",
                    "object sizes must be positive and finite",
                ));
            }
        }
        Ok(())
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        let [min, max] = self.bounds;
        x >= min[0] && x <= max[0] && y >= min[1] && y <= max[1]
    }

    pub fn ground_height(&self, x: f64, y: f64) -> Option<f64> {
        self.ground.as_ref().map(|g| g.height(x, y))
    }
}

/// Length of `[a0, a1] ∩ [b0, b1]`.
pub(crate) fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}
