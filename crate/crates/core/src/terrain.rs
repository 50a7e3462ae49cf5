//! Ground, slope, obstacle, validity and cost rasters derived from a voxel
//! grid snapshot.
//!
//! Rasters are north-up and cover the grid's horizontal footprint: grid
//! column `(i, j)` maps to raster cell `(ny - 1 - j, i)`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::config::TerrainConfig;
use crate::raster::RasterMap;
use crate::voxel::VoxelGrid;

/// The five per-frame terrain products, all sharing one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainStack {
    /// Ground height, meters; NaN where invalid.
    pub ground: RasterMap,
    /// Terrain slope, radians; NaN where invalid or undefined.
    pub slope: RasterMap,
    /// 1 where an obstacle was found, else 0.
    pub obstacle: RasterMap,
    /// 1 where the ground is supported by data, else 0.
    pub validity: RasterMap,
    /// Fused traversability cost, finite and non-negative everywhere.
    pub cost: RasterMap,
}

impl TerrainStack {
    pub fn compute(grid: &VoxelGrid, config: &TerrainConfig) -> Self {
        let (ground, validity) = estimate_ground(grid);
        let slope = compute_slope(&ground, &validity, config.slope_neighborhood as usize);
        let obstacle = detect_obstacles(grid, &ground, config.obstacle_height_threshold);
        let cost = compute_cost(&slope, &obstacle, &validity, config);
        Self {
            ground,
            slope,
            obstacle,
            validity,
            cost,
        }
    }

    /// Layer names in output order, paired with their rasters.
    pub fn layers(&self) -> [(&'static str, &RasterMap); 5] {
        [
            ("ground", &self.ground),
            ("slope", &self.slope),
            ("obstacle", &self.obstacle),
            ("validity", &self.validity),
            ("cost", &self.cost),
        ]
    }
}

/// Weighted ground height of every column.
///
/// Each occupied voxel is weighted by mean intensity times hit count, which is
/// its intensity sum, and contributes its centre height. A column is valid when
/// the total weight is positive.
pub fn estimate_ground(grid: &VoxelGrid) -> (RasterMap, RasterMap) {
    let (w, h, origin) = grid.raster_geometry();
    let res = grid.resolution();
    let mut ground = RasterMap::nodata(w, h, res, origin);
    let mut validity = RasterMap::filled(w, h, res, origin, 0.0);
    let [nx, ny, nz] = grid.dims();
    let heights: Vec<f64> = (0..nz).map(|k| grid.layer_height(k)).collect();
    for i in 0..nx {
        for j in 0..ny {
            let (hits, sums) = grid.column(i, j);
            if let Some(z) = column_ground(hits, sums, &heights) {
                let (row, col) = grid.column_to_cell(i, j);
                ground.set(row, col, z);
                validity.set(row, col, 1.0);
            }
        }
    }
    (ground, validity)
}

/// Weighted mean of voxel heights in one column, or `None` when no weight.
pub fn column_ground(hits: &[u32], sums: &[f64], heights: &[f64]) -> Option<f64> {
    let mut wsum = 0.0;
    let mut zsum = 0.0;
    for k in 0..hits.len() {
        if hits[k] > 0 {
            let w = sums[k];
            wsum += w;
            zsum += w * heights[k];
        }
    }
    (wsum > 0.0).then(|| zsum / wsum)
}

/// Slope magnitude `atan(|grad|)` from finite differences at `n` cells.
///
/// Per axis, a central difference is used when both neighbours are valid and a
/// one-sided difference against the cell itself when only one is. The slope is
/// NaN where the cell is invalid or either axis has no valid neighbour.
pub fn compute_slope(ground: &RasterMap, validity: &RasterMap, n: usize) -> RasterMap {
    let mut slope = ground.like(f64::NAN);
    let (w, h) = (ground.width, ground.height);
    let step = n as f64 * ground.resolution;
    let valid = |r: usize, c: usize| validity.get(r, c) != 0.0;
    let deriv = |center: f64, lo: Option<f64>, hi: Option<f64>| match (lo, hi) {
        (Some(a), Some(b)) => Some((b - a) / (2.0 * step)),
        (Some(a), None) => Some((center - a) / step),
        (None, Some(b)) => Some((b - center) / step),
        (None, None) => None,
    };
    for r in 0..h {
        for c in 0..w {
            if !valid(r, c) {
                continue;
            }
            let z = ground.get(r, c);
            let west = (c >= n && valid(r, c - n)).then(|| ground.get(r, c - n));
            let east = (c + n < w && valid(r, c + n)).then(|| ground.get(r, c + n));
            let north = (r >= n && valid(r - n, c)).then(|| ground.get(r - n, c));
            let south = (r + n < h && valid(r + n, c)).then(|| ground.get(r + n, c));
            if let (Some(gx), Some(gy)) = (deriv(z, west, east), deriv(z, south, north)) {
                slope.set(r, c, (gx * gx + gy * gy).sqrt().atan());
            }
        }
    }
    slope
}

/// Marks columns holding a solid voxel whose centre is at least `threshold`
/// above the column's ground. Invalid columns are never obstacles.
pub fn detect_obstacles(grid: &VoxelGrid, ground: &RasterMap, threshold: f64) -> RasterMap {
    let [nx, ny, _] = grid.dims();
    detect_obstacles_in(grid, ground, threshold, [0, 0], [nx, ny])
}

/// As [`detect_obstacles`] but only for grid columns `lo <= (i, j) < hi`;
/// other cells are 0.
pub fn detect_obstacles_in(
    grid: &VoxelGrid,
    ground: &RasterMap,
    threshold: f64,
    lo: [usize; 2],
    hi: [usize; 2],
) -> RasterMap {
    let mut out = ground.like(0.0);
    let [nx, ny, nz] = grid.dims();
    let thr = grid.config().solid_intensity_threshold;
    let heights: Vec<f64> = (0..nz).map(|k| grid.layer_height(k)).collect();
    for i in lo[0]..hi[0].min(nx) {
        for j in lo[1]..hi[1].min(ny) {
            let (row, col) = grid.column_to_cell(i, j);
            let g = ground.get(row, col);
            if g.is_nan() {
                continue;
            }
            let (hits, sums) = grid.column(i, j);
            if column_has_obstacle(hits, sums, &heights, g + threshold, thr) {
                out.set(row, col, 1.0);
            }
        }
    }
    out
}

fn column_has_obstacle(
    hits: &[u32],
    sums: &[f64],
    heights: &[f64],
    min_z: f64,
    solid_threshold: f64,
) -> bool {
    (0..hits.len()).rev().take_while(|&k| heights[k] >= min_z).any(|k| {
        hits[k] > 0 && sums[k] / hits[k] as f64 >= solid_threshold
    })
}

/// Weighted sum of the validity penalty, the saturated slope term and the
/// obstacle term. Invalid cells get the validity penalty alone; a valid cell
/// without a defined slope gets no slope term.
pub fn compute_cost(
    slope: &RasterMap,
    obstacle: &RasterMap,
    validity: &RasterMap,
    config: &TerrainConfig,
) -> RasterMap {
    let mut cost = validity.like(0.0);
    for (idx, out) in cost.values.iter_mut().enumerate() {
        *out = cell_cost(
            validity.values[idx],
            slope.values[idx],
            obstacle.values[idx],
            config,
        );
    }
    cost
}

/// Cost of one cell.
pub fn cell_cost(validity: f64, slope: f64, obstacle: f64, config: &TerrainConfig) -> f64 {
    let penalty = config.validity.scale() * (1.0 - validity);
    if validity == 0.0 {
        return penalty;
    }
    let s = if slope.is_nan() {
        0.0
    } else {
        slope.min(config.slope_saturation) / config.slope_saturation
    };
    penalty + config.slope.scale() * s + config.obstacle.scale() * obstacle
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridConfig;
    use crate::frontend::SensorPoint;
    use crate::geometry::Vec3;
    use crate::voxel::IntensityMode;

    fn grid(dims: [usize; 3]) -> VoxelGrid {
        VoxelGrid::with_origin(
            GridConfig {
                dims,
                resolution: 0.4,
                solid_intensity_threshold: 0.3,
                ..GridConfig::default()
            },
            IntensityMode::Intensity,
            [0, 0, 0],
        )
    }

    fn put(g: &mut VoxelGrid, x: f64, y: f64, z: f64, v: f64, n: usize) {
        let p = SensorPoint {
            position: Vec3::new(x, y, z),
            intensity: v,
            t: 0.0,
        };
        for _ in 0..n {
            g.integrate_points(&[p]);
        }
    }

    #[test]
    fn single_voxel_ground() {
        let mut g = grid([2, 2, 4]);
        put(&mut g, 0.1, 0.1, 0.1, 0.5, 1);
        let (ground, validity) = estimate_ground(&g);
        // Column (0, 0) is the south-west cell: row 1, col 0.
        assert!((ground.get(1, 0) - 0.2).abs() < 1e-12);
        assert_eq!(validity.get(1, 0), 1.0);
        assert!(ground.get(0, 0).is_nan());
        assert_eq!(validity.get(0, 0), 0.0);
    }

    #[test]
    fn obstacle_rules() {
        let mut g = grid([2, 1, 8]);
        // Ground at 0.2 only in column 0, tall solid voxel in both columns.
        put(&mut g, 0.1, 0.1, 0.1, 0.9, 50);
        put(&mut g, 0.1, 0.1, 2.1, 0.9, 1);
        put(&mut g, 0.5, 0.1, 2.1, 0.9, 1);
        let (ground, _) = estimate_ground(&g);
        let obs = detect_obstacles(&g, &ground, 1.0);
        assert_eq!(obs.get(0, 0), 1.0);
        // Column 1 is valid, its ground is the voxel itself: not an obstacle.
        assert_eq!(obs.get(0, 1), 0.0);
    }

    #[test]
    fn isolated_cell_has_no_slope() {
        let mut ground = RasterMap::nodata(3, 3, 0.4, [0.0, 1.2]);
        let mut validity = ground.like(0.0);
        ground.set(1, 1, 0.5);
        validity.set(1, 1, 1.0);
        assert!(compute_slope(&ground, &validity, 1).get(1, 1).is_nan());
    }

    #[test]
    fn cost_terms() {
        let c = TerrainConfig {
            validity: crate::config::CostTerm::new(1.0, 5.0),
            slope: crate::config::CostTerm::new(2.0, 3.0),
            obstacle: crate::config::CostTerm::new(1.0, 10.0),
            ..TerrainConfig::default()
        };
        assert_eq!(cell_cost(1.0, 0.0, 0.0, &c), 0.0);
        assert_eq!(cell_cost(1.0, 0.0, 1.0, &c), 10.0);
        assert_eq!(cell_cost(0.0, f64::NAN, 0.0, &c), 5.0);
        assert_eq!(cell_cost(1.0, 2.0, 1.0, &c), 16.0);
        assert_eq!(cell_cost(1.0, f64::NAN, 0.0, &c), 0.0);
    }
}
