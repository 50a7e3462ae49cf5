//! Range histograms, range metrics, height-map differences and object
//! detection ranges.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::PoseError;
use crate::frontend::SensorPoint;
use crate::geometry::Vec3;
use crate::raster::RasterMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no points to evaluate")]
    EmptyInput,
    #[error("rasters differ in size, resolution or origin")]
    Misaligned,
    #[error("bin width must be > 0")]
    BinWidth,
    #[error(transparent)]
    Pose(#[from] PoseError),
}

/// Point counts per fixed-width range bin, starting at zero range.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl RangeHistogram {
    pub fn new(bin_width: f64) -> Result<Self, EvalError> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(EvalError::BinWidth);
        }
        Ok(Self {
            bin_width,
            counts: Vec::new(),
        })
    }

    pub fn add(&mut self, range: f64) {
        let b = (range / self.bin_width).floor() as usize;
        if b >= self.counts.len() {
            self.counts.resize(b + 1, 0);
        }
        self.counts[b] += 1;
    }

    /// Adds all counts of another histogram with the same bin width.
    pub fn merge(&mut self, other: &RangeHistogram) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn percentages(&self) -> Vec<f64> {
        let total = self.total();
        if total == 0 {
            return alloc::vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .map(|&c| c as f64 * 100.0 / total as f64)
            .collect()
    }

    pub fn from_percentages(bin_width: f64, pct: &[f64]) -> Self {
        // Fixed-point counts keep percentages exact to 1e-9.
        Self {
            bin_width,
            counts: pct.iter().map(|p| (p * 1e9).round() as u64).collect(),
        }
    }
}

/// Histogram of point distances from the sensor origin at each point's time.
pub fn range_histogram<F>(
    points: &[SensorPoint],
    bin_width: f64,
    mut origin_at: F,
) -> Result<RangeHistogram, EvalError>
where
    F: FnMut(f64) -> Result<Vec3, PoseError>,
{
    if points.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut h = RangeHistogram::new(bin_width)?;
    let mut cache: Option<(f64, Vec3)> = None;
    for p in points {
        let o = match cache {
            Some((t, o)) if t == p.t => o,
            _ => {
                let o = origin_at(p.t)?;
                cache = Some((p.t, o));
                o
            }
        };
        h.add((p.position - o).norm());
    }
    Ok(h)
}

/// Upper edge of the farthest bin holding at least `floor_pct` percent of the
/// points; 0 when no bin qualifies.
pub fn effective_range(hist: &RangeHistogram, floor_pct: f64) -> f64 {
    hist.percentages()
        .iter()
        .rposition(|&p| p >= floor_pct)
        .map_or(0.0, |b| (b + 1) as f64 * hist.bin_width)
}

/// Greatest distance of any point from the sensor origin at its time.
pub fn max_range<F>(points: &[SensorPoint], mut origin_at: F) -> Result<f64, EvalError>
where
    F: FnMut(f64) -> Result<Vec3, PoseError>,
{
    if points.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut best: f64 = 0.0;
    for p in points {
        best = best.max((p.position - origin_at(p.t)?).norm());
    }
    Ok(best)
}

/// Radar-vs-lidar ground comparison for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeightDiff {
    pub mean_abs_error: f64,
    /// Population standard deviation of the absolute errors.
    pub std_dev: f64,
    pub compared: usize,
    pub radar_only: usize,
}

/// Statistics over cells finite in both maps, plus the count of cells finite
/// only in the radar map. With nothing to compare, mean and deviation are 0.
pub fn heightmap_diff(radar: &RasterMap, lidar: &RasterMap) -> Result<HeightDiff, EvalError> {
    if !radar.is_aligned_with(lidar) {
        return Err(EvalError::Misaligned);
    }
    let mut n = 0usize;
    let mut radar_only = 0usize;
    let mut sum = 0.0;
    for (&a, &b) in radar.values.iter().zip(&lidar.values) {
        match (a.is_finite(), b.is_finite()) {
            (true, true) => {
                n += 1;
                sum += (a - b).abs();
            }
            (true, false) => radar_only += 1,
            _ => {}
        }
    }
    if n == 0 {
        return Ok(HeightDiff {
            radar_only,
            ..HeightDiff::default()
        });
    }
    let mean = sum / n as f64;
    let mut var = 0.0;
    for (&a, &b) in radar.values.iter().zip(&lidar.values) {
        if a.is_finite() && b.is_finite() {
            let d = (a - b).abs() - mean;
            var += d * d;
        }
    }
    Ok(HeightDiff {
        mean_abs_error: mean,
        std_dev: (var / n as f64).sqrt(),
        compared: n,
        radar_only,
    })
}

/// Axis-aligned horizontal footprint of an object, world meters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectBounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl ObjectBounds {
    /// Horizontal distance from `p` to the nearest point of the footprint.
    pub fn distance(&self, p: &Vec3) -> f64 {
        let dx = (self.min[0] - p.x).max(0.0).max(p.x - self.max[0]);
        let dy = (self.min[1] - p.y).max(0.0).max(p.y - self.max[1]);
        (dx * dx + dy * dy).sqrt()
    }

    /// Raster cells whose footprint overlaps the bounds.
    pub fn overlapping_cells(&self, r: &RasterMap) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for row in 0..r.height {
            let y_hi = r.origin[1] - row as f64 * r.resolution;
            let y_lo = y_hi - r.resolution;
            if y_hi <= self.min[1] || y_lo >= self.max[1] {
                continue;
            }
            for col in 0..r.width {
                let x_lo = r.origin[0] + col as f64 * r.resolution;
                let x_hi = x_lo + r.resolution;
                if x_hi > self.min[0] && x_lo < self.max[0] {
                    out.push((row, col));
                }
            }
        }
        out
    }

    /// Whether any overlapping cell of the obstacle raster is set.
    pub fn any_obstacle(&self, obstacle: &RasterMap) -> bool {
        self.overlapping_cells(obstacle)
            .into_iter()
            .any(|(r, c)| obstacle.get(r, c) != 0.0)
    }
}

/// Debounced first-detection tracker.
///
/// Feed one observation per frame. The object counts as detected once it is
/// flagged in `required` consecutive frames; the reported range is the
/// vehicle-object distance at the first frame of that run.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionTracker {
    required: usize,
    run: usize,
    run_start_range: f64,
    run_start: (usize, f64),
    detected: Option<DetectionEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub range: f64,
    /// Index of the first frame of the sustained run.
    pub frame: usize,
    pub t: f64,
}

impl DetectionTracker {
    pub fn new(required: usize) -> Self {
        Self {
            required: required.max(1),
            run: 0,
            run_start_range: 0.0,
            run_start: (0, 0.0),
            detected: None,
        }
    }

    pub fn observe(&mut self, frame: usize, t: f64, range: f64, flagged: bool) {
        if self.detected.is_some() {
            return;
        }
        if !flagged {
            self.run = 0;
            return;
        }
        if self.run == 0 {
            self.run_start_range = range;
            self.run_start = (frame, t);
        }
        self.run += 1;
        if self.run >= self.required {
            self.detected = Some(DetectionEvent {
                range: self.run_start_range,
                frame: self.run_start.0,
                t: self.run_start.1,
            });
        }
    }

    pub fn result(&self) -> Option<DetectionEvent> {
        self.detected
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64) -> SensorPoint {
        SensorPoint {
            position: Vec3::new(x, 0.0, 0.0),
            intensity: 0.5,
            t: 0.0,
        }
    }

    fn origin(_: f64) -> Result<Vec3, PoseError> {
        Ok(Vec3::zeros())
    }

    #[test]
    fn histogram_basics() {
        let h = range_histogram(&[at(0.5), at(1.5)], 1.0, origin).unwrap();
        assert_eq!(h.counts, alloc::vec![1, 1]);
        assert_eq!(h.percentages(), alloc::vec![50.0, 50.0]);
        assert_eq!(range_histogram(&[], 1.0, origin), Err(EvalError::EmptyInput));
    }

    #[test]
    fn effective_range_examples() {
        let h = RangeHistogram::from_percentages(1.0, &[50.0, 30.0, 0.2]);
        assert_eq!(effective_range(&h, 0.25), 2.0);
        // 500 bins of 0.2 % each: none reaches the floor.
        let h = RangeHistogram::from_percentages(1.0, &[0.2; 500]);
        assert_eq!(effective_range(&h, 0.25), 0.0);
    }

    #[test]
    fn max_range_single() {
        assert_eq!(max_range(&[at(10.0)], origin).unwrap(), 10.0);
    }

    #[test]
    fn diff_examples() {
        let r = RasterMap {
            width: 2,
            height: 2,
            resolution: 1.0,
            origin: [0.0, 2.0],
            values: alloc::vec![1.0, 0.0, 0.0, 0.0],
        };
        let l = r.like(0.0);
        let d = heightmap_diff(&r, &l).unwrap();
        assert_eq!(d.compared, 4);
        assert!((d.mean_abs_error - 0.25).abs() < 1e-12);
        assert!((d.std_dev - 0.1875f64.sqrt()).abs() < 1e-12);
        let none = r.like(f64::NAN);
        let d = heightmap_diff(&r, &none).unwrap();
        assert_eq!((d.compared, d.radar_only), (0, 4));
        let shifted = RasterMap {
            origin: [0.5, 2.0],
            ..r.clone()
        };
        assert_eq!(heightmap_diff(&r, &shifted), Err(EvalError::Misaligned));
    }

    #[test]
    fn tracker_debounces() {
        let mut t = DetectionTracker::new(2);
        t.observe(0, 0.0, 90.0, true);
        t.observe(1, 0.25, 89.0, false);
        t.observe(2, 0.5, 88.0, true);
        assert_eq!(t.result(), None);
        t.observe(3, 0.75, 87.0, true);
        let e = t.result().unwrap();
        assert_eq!((e.range, e.frame), (88.0, 2));
    }

    #[test]
    fn bounds_distance() {
        let b = ObjectBounds {
            min: [10.0, -1.0],
            max: [11.0, 1.0],
        };
        assert_eq!(b.distance(&Vec3::new(0.0, 0.0, 5.0)), 10.0);
        assert_eq!(b.distance(&Vec3::new(10.5, 0.0, 0.0)), 0.0);
    }
}
