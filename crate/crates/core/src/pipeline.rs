//! Frame-by-frame mapping: integrate a frame's points, scroll the grid with
//! the vehicle, then derive the terrain products.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::config::{GridConfig, TerrainConfig};
use crate::eval::ObjectBounds;
use crate::frontend::SensorPoint;
use crate::geometry::Vec3;
use crate::terrain::{column_ground, TerrainStack};
use crate::voxel::{IntegrateStats, IntensityMode, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameStats {
    pub integrated: usize,
    pub dropped: usize,
    pub shift: Option<[i64; 3]>,
}

#[derive(Debug, Clone)]
pub struct MapPipeline {
    grid_config: GridConfig,
    terrain: TerrainConfig,
    mode: IntensityMode,
    grid: Option<VoxelGrid>,
}

impl MapPipeline {
    pub fn new(grid_config: GridConfig, terrain: TerrainConfig, mode: IntensityMode) -> Self {
        Self {
            grid_config,
            terrain,
            mode,
            grid: None,
        }
    }

    /// The grid, once the first frame has been processed.
    pub fn grid(&self) -> Option<&VoxelGrid> {
        self.grid.as_ref()
    }

    pub fn terrain_config(&self) -> &TerrainConfig {
        &self.terrain
    }

    /// Integrates one frame and recentres on `vehicle`. The grid is created
    /// around the vehicle on the first call.
    pub fn process(&mut self, points: &[SensorPoint], vehicle: &Vec3) -> FrameStats {
        let (cfg, mode) = (&self.grid_config, self.mode);
        let grid = self
            .grid
            .get_or_insert_with(|| VoxelGrid::new(cfg.clone(), mode, *vehicle));
        let IntegrateStats {
            integrated,
            dropped,
        } = grid.integrate_points(points);
        let shift = grid.recenter(vehicle);
        grid.apply_retention();
        FrameStats {
            integrated,
            dropped,
            shift,
        }
    }

    /// Full terrain stack of the current grid.
    pub fn terrain_stack(&self) -> Option<TerrainStack> {
        self.grid
            .as_ref()
            .map(|g| TerrainStack::compute(g, &self.terrain))
    }

    /// Whether any grid column overlapping `bounds` is an obstacle. Equivalent
    /// to testing the full obstacle raster, but only touches those columns.
    pub fn obstacle_within(&self, bounds: &ObjectBounds) -> bool {
        let Some(g) = self.grid.as_ref() else {
            return false;
        };
        let o = g.world_origin();
        let r = g.resolution();
        let [nx, ny, nz] = g.dims();
        let range = |lo: f64, hi: f64, origin: f64, n: usize| -> (usize, usize) {
            // Columns whose half-open footprint overlaps the open interval (lo, hi).
            let a = ((lo - origin) / r).floor().max(0.0);
            let b = ((hi - origin) / r).ceil().min(n as f64);
            if b <= a {
                (0, 0)
            } else {
                (a as usize, b as usize)
            }
        };
        let (i0, i1) = range(bounds.min[0], bounds.max[0], o.x, nx);
        let (j0, j1) = range(bounds.min[1], bounds.max[1], o.y, ny);
        let heights: Vec<f64> = (0..nz).map(|k| g.layer_height(k)).collect();
        let solid = g.config().solid_intensity_threshold;
        for i in i0..i1 {
            for j in j0..j1 {
                let (hits, sums) = g.column(i, j);
                let Some(ground) = column_ground(hits, sums, &heights) else {
                    continue;
                };
                let min_z = ground + self.terrain.obstacle_height_threshold;
                let hit = (0..nz).rev().take_while(|&k| heights[k] >= min_z).any(|k| {
                    hits[k] > 0 && sums[k] / hits[k] as f64 >= solid
                });
                if hit {
                    return true;
                }
            }
        }
        false
    }
}
