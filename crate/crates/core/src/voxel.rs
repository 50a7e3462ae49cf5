//! Rolling vehicle-centred voxel grid.
//!
//! Every cell keeps a hit count and a 64-bit sum of the intensities that
//! landed in it, so the mean intensity is `intensity_sum / hits` and the
//! result does not depend on integration order.
//!
//! The grid is anchored to the world by an integer cell index: logical cell
//! `(i, j, k)` covers the half-open box
//! `[(origin + (i, j, k)) * res, (origin + (i, j, k) + 1) * res)`.
//! Storage is x-major with contiguous z columns.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::{GridConfig, Retention};
use crate::frontend::SensorPoint;
use crate::geometry::Vec3;
use crate::raster::RasterMap;

/// How point intensities enter the per-cell sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntensityMode {
    /// Sum the point intensities (radar).
    #[default]
    Intensity,
    /// Every hit counts as intensity 1, so any hit cell is solid and the
    /// ground weight reduces to the hit count (lidar).
    HitsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VoxelCell {
    pub hits: u32,
    pub intensity_sum: f64,
}

impl VoxelCell {
    pub fn mean_intensity(&self) -> Option<f64> {
        (self.hits > 0).then(|| self.intensity_sum / self.hits as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntegrateStats {
    pub integrated: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct VoxelGrid {
    config: GridConfig,
    mode: IntensityMode,
    origin: [i64; 3],
    hits: Vec<u32>,
    sums: Vec<f64>,
    dropped: u64,
}

impl VoxelGrid {
    /// A grid whose central cell contains `center`.
    pub fn new(config: GridConfig, mode: IntensityMode, center: Vec3) -> Self {
        let n = config.dims.iter().product();
        let mut grid = Self {
            mode,
            origin: [0; 3],
            hits: vec![0; n],
            sums: vec![0.0; n],
            dropped: 0,
            config,
        };
        let c = grid.world_cell(&center);
        grid.origin = core::array::from_fn(|a| c[a] - (grid.config.dims[a] / 2) as i64);
        grid
    }

    /// A grid with an explicit world cell index for logical cell `(0, 0, 0)`.
    pub fn with_origin(config: GridConfig, mode: IntensityMode, origin: [i64; 3]) -> Self {
        let n = config.dims.iter().product();
        Self {
            mode,
            origin,
            hits: vec![0; n],
            sums: vec![0.0; n],
            dropped: 0,
            config,
        }
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn mode(&self) -> IntensityMode {
        self.mode
    }

    pub fn dims(&self) -> [usize; 3] {
        self.config.dims
    }

    pub fn resolution(&self) -> f64 {
        self.config.resolution
    }

    /// World cell index of logical cell `(0, 0, 0)`.
    pub fn origin(&self) -> [i64; 3] {
        self.origin
    }

    /// World coordinates of the grid's minimum corner.
    pub fn world_origin(&self) -> Vec3 {
        let r = self.config.resolution;
        Vec3::new(
            self.origin[0] as f64 * r,
            self.origin[1] as f64 * r,
            self.origin[2] as f64 * r,
        )
    }

    /// Points dropped because they fell outside the grid, since creation.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Global world cell index of a position.
    pub fn world_cell(&self, p: &Vec3) -> [i64; 3] {
        let r = self.config.resolution;
        [
            (p.x / r).floor() as i64,
            (p.y / r).floor() as i64,
            (p.z / r).floor() as i64,
        ]
    }

    /// Logical index of the cell owning `p`, or `None` outside the grid.
    pub fn world_to_index(&self, p: &Vec3) -> Option<[usize; 3]> {
        let o = self.world_origin();
        let r = self.config.resolution;
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - o[a]) / r).floor();
            if !(f >= 0.0 && f < self.config.dims[a] as f64) {
                return None;
            }
            idx[a] = f as usize;
        }
        Some(idx)
    }

    /// Centre of a logical cell in world coordinates.
    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let r = self.config.resolution;
        Vec3::new(
            (self.origin[0] + i as i64) as f64 * r + 0.5 * r,
            (self.origin[1] + j as i64) as f64 * r + 0.5 * r,
            (self.origin[2] + k as i64) as f64 * r + 0.5 * r,
        )
    }

    /// World z of the centre of layer `k`.
    pub fn layer_height(&self, k: usize) -> f64 {
        let r = self.config.resolution;
        (self.origin[2] + k as i64) as f64 * r + 0.5 * r
    }

    #[inline]
    fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        let [_, ny, nz] = self.config.dims;
        (i * ny + j) * nz + k
    }

    pub fn cell(&self, i: usize, j: usize, k: usize) -> VoxelCell {
        let f = self.flat(i, j, k);
        VoxelCell {
            hits: self.hits[f],
            intensity_sum: self.sums[f],
        }
    }

    /// Hit counts and intensity sums of column `(i, j)`, bottom to top.
    pub fn column(&self, i: usize, j: usize) -> (&[u32], &[f64]) {
        let nz = self.config.dims[2];
        let s = self.flat(i, j, 0);
        (&self.hits[s..s + nz], &self.sums[s..s + nz])
    }

    /// Adds every in-bounds point to its cell; the rest are counted as dropped.
    pub fn integrate_points(&mut self, points: &[SensorPoint]) -> IntegrateStats {
        let mut stats = IntegrateStats::default();
        for p in points {
            match self.world_to_index(&p.position) {
                Some([i, j, k]) => {
                    let f = self.flat(i, j, k);
                    self.hits[f] += 1;
                    self.sums[f] += match self.mode {
                        IntensityMode::Intensity => p.intensity,
                        IntensityMode::HitsOnly => 1.0,
                    };
                    stats.integrated += 1;
                }
                None => stats.dropped += 1,
            }
        }
        self.dropped += stats.dropped as u64;
        stats
    }

    /// Whether a cell is solid: hit at least once with mean intensity at or
    /// above the solid threshold.
    #[inline]
    pub fn is_solid(&self, i: usize, j: usize, k: usize) -> bool {
        let f = self.flat(i, j, k);
        solid(self.hits[f], self.sums[f], self.config.solid_intensity_threshold)
    }

    pub fn solid_mask(&self) -> SolidMask {
        let thr = self.config.solid_intensity_threshold;
        SolidMask {
            dims: self.config.dims,
            bits: self
                .hits
                .iter()
                .zip(&self.sums)
                .map(|(&h, &s)| solid(h, s, thr))
                .collect(),
        }
    }

    /// Scrolls the grid so the vehicle sits in the central cell again once it
    /// has moved more than the hysteresis away from it. Returns the applied
    /// shift, if any.
    pub fn recenter(&mut self, vehicle: &Vec3) -> Option<[i64; 3]> {
        let c = self.world_cell(vehicle);
        let h = self.config.recenter_hysteresis as i64;
        let mut shift = [0i64; 3];
        for a in 0..3 {
            let d = c[a] - self.origin[a] - (self.config.dims[a] / 2) as i64;
            if d.abs() > h {
                shift[a] = d;
            }
        }
        if shift == [0; 3] {
            return None;
        }
        self.shift(shift);
        Some(shift)
    }

    /// Moves the grid window by whole cells: afterwards logical cell
    /// `(i, j, k)` holds what was at `(i + dx, j + dy, k + dz)`. Cells that
    /// leave the window are discarded and newly exposed cells are empty.
    pub fn shift(&mut self, d: [i64; 3]) {
        let [nx, ny, nz] = self.config.dims;
        for a in 0..3 {
            self.origin[a] += d[a];
        }
        if (0..3).any(|a| d[a].unsigned_abs() as usize >= self.config.dims[a]) {
            self.hits.fill(0);
            self.sums.fill(0.0);
            return;
        }
        if d[0] != 0 {
            let slab = ny * nz;
            shift_block(&mut self.hits, &mut self.sums, 0, nx * slab, slab, d[0]);
        }
        if d[1] != 0 {
            for i in 0..nx {
                let start = i * ny * nz;
                shift_block(&mut self.hits, &mut self.sums, start, ny * nz, nz, d[1]);
            }
        }
        if d[2] != 0 {
            for c in 0..nx * ny {
                shift_block(&mut self.hits, &mut self.sums, c * nz, nz, 1, d[2]);
            }
        }
    }

    /// Ages the evidence according to the retention policy.
    pub fn apply_retention(&mut self) {
        if let Retention::Decay { keep_fraction } = self.config.retention {
            for (h, s) in self.hits.iter_mut().zip(self.sums.iter_mut()) {
                if *h == 0 {
                    continue;
                }
                let kept = (*h as f64 * keep_fraction).floor() as u32;
                *s = if kept == 0 { 0.0 } else { *s * kept as f64 / *h as f64 };
                *h = kept;
            }
        }
    }

    pub fn total_hits(&self) -> u64 {
        self.hits.iter().map(|&h| h as u64).sum()
    }

    /// Horizontal raster geometry matching the grid columns:
    /// `(width, height, origin)` with column `i` and row `ny - 1 - j`.
    pub fn raster_geometry(&self) -> (usize, usize, [f64; 2]) {
        let o = self.world_origin();
        let [nx, ny, _] = self.config.dims;
        (nx, ny, [o.x, o.y + ny as f64 * self.config.resolution])
    }

    /// Raster `(row, col)` of grid column `(i, j)`.
    #[inline]
    pub fn column_to_cell(&self, i: usize, j: usize) -> (usize, usize) {
        (self.config.dims[1] - 1 - j, i)
    }

    /// One horizontal layer as a raster of hit counts or mean intensities
    /// (NaN where empty), for debugging.
    pub fn slice_raster(&self, k: usize, field: SliceField) -> RasterMap {
        let (w, h, origin) = self.raster_geometry();
        let mut r = RasterMap::nodata(w, h, self.config.resolution, origin);
        let [nx, ny, _] = self.config.dims;
        for i in 0..nx {
            for j in 0..ny {
                let c = self.cell(i, j, k);
                let v = match field {
                    SliceField::Hits => c.hits as f64,
                    SliceField::MeanIntensity => c.mean_intensity().unwrap_or(f64::NAN),
                };
                let (row, col) = self.column_to_cell(i, j);
                r.set(row, col, v);
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceField {
    Hits,
    MeanIntensity,
}

#[inline]
fn solid(hits: u32, sum: f64, threshold: f64) -> bool {
    hits > 0 && sum / hits as f64 >= threshold
}

/// Shifts `len` elements starting at `start` by `d` units of `unit` elements
/// towards lower indices (for positive `d`), zero-filling the vacated end.
fn shift_block(hits: &mut [u32], sums: &mut [f64], start: usize, len: usize, unit: usize, d: i64) {
    let off = d.unsigned_abs() as usize * unit;
    let end = start + len;
    if d > 0 {
        hits.copy_within(start + off..end, start);
        sums.copy_within(start + off..end, start);
        hits[end - off..end].fill(0);
        sums[end - off..end].fill(0.0);
    } else {
        hits.copy_within(start..end - off, start + off);
        sums.copy_within(start..end - off, start + off);
        hits[start..start + off].fill(0);
        sums[start..start + off].fill(0.0);
    }
}

/// Dense boolean solid classification of a grid snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidMask {
    dims: [usize; 3],
    bits: Vec<bool>,
}

impl SolidMask {
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        let [_, ny, nz] = self.dims;
        self.bits[(i * ny + j) * nz + k]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }
}
