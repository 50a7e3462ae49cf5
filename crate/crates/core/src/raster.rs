//! North-up 2D rasters shared by the terrain products and the evaluation.
//!
//! Cell `(row, col)` is stored at `row * width + col`. Row 0 is the northern
//! edge (largest y) and column 0 the western edge (smallest x). `origin` is
//! the world `(x, y)` of the north-west corner of cell `(0, 0)`. Missing data
//! is NaN.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct RasterMap {
    pub width: usize,
    pub height: usize,
    /// Cell edge length, meters.
    pub resolution: f64,
    /// World `(x, y)` of the north-west corner of cell `(0, 0)`.
    pub origin: [f64; 2],
    pub values: Vec<f64>,
}

impl RasterMap {
    pub fn filled(width: usize, height: usize, resolution: f64, origin: [f64; 2], v: f64) -> Self {
        Self {
            width,
            height,
            resolution,
            origin,
            values: vec![v; width * height],
        }
    }

    pub fn nodata(width: usize, height: usize, resolution: f64, origin: [f64; 2]) -> Self {
        Self::filled(width, height, resolution, origin, f64::NAN)
    }

    /// An empty raster with the same geometry.
    pub fn like(&self, v: f64) -> Self {
        Self::filled(self.width, self.height, self.resolution, self.origin, v)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.width + col] = v;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// World `(x, y)` of a cell centre.
    pub fn cell_center(&self, row: usize, col: usize) -> [f64; 2] {
        [
            self.origin[0] + (col as f64 + 0.5) * self.resolution,
            self.origin[1] - (row as f64 + 0.5) * self.resolution,
        ]
    }

    /// Cell containing a world position, if inside.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let c = ((x - self.origin[0]) / self.resolution).floor();
        let r = ((self.origin[1] - y) / self.resolution).floor();
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((r as usize, c as usize))
    }

    /// Same dimensions, resolution and origin.
    pub fn is_aligned_with(&self, other: &RasterMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.resolution == other.resolution
            && self.origin == other.origin
    }

    /// Number of finite cells.
    pub fn count_finite(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_is_north_up() {
        let r = RasterMap::nodata(4, 3, 0.5, [10.0, 20.0]);
        assert_eq!(r.locate(10.1, 19.9), Some((0, 0)));
        assert_eq!(r.locate(11.9, 18.6), Some((2, 3)));
        assert_eq!(r.locate(9.9, 19.9), None);
        assert_eq!(r.locate(10.1, 20.1), None);
        let c = r.cell_center(2, 3);
        assert_eq!(r.locate(c[0], c[1]), Some((2, 3)));
    }
}
