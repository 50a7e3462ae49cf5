//! In-memory scan records, mirroring the on-disk scan files.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::ScanError;

/// One 360° radar sweep: per-azimuth timestamp, angle and a row of
/// normalised intensities over fixed-width range bins.
///
/// Intensities are stored azimuth-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarScanRecord {
    pub start_t: f64,
    pub bin_size: f64,
    bin_count: usize,
    times: Vec<f64>,
    angles: Vec<f64>,
    intensities: Vec<f32>,
}

impl RadarScanRecord {
    pub fn new(start_t: f64, bin_size: f64, bin_count: usize) -> Self {
        Self {
            start_t,
            bin_size,
            bin_count,
            times: Vec::new(),
            angles: Vec::new(),
            intensities: Vec::new(),
        }
    }

    pub fn with_capacity(start_t: f64, bin_size: f64, bin_count: usize, azimuths: usize) -> Self {
        Self {
            start_t,
            bin_size,
            bin_count,
            times: Vec::with_capacity(azimuths),
            angles: Vec::with_capacity(azimuths),
            intensities: Vec::with_capacity(azimuths * bin_count),
        }
    }

    /// Appends one azimuth. Panics when the row length differs from
    /// `bin_count`.
    pub fn push_azimuth(&mut self, t: f64, angle: f64, row: &[f32]) {
        assert_eq!(row.len(), self.bin_count, "azimuth row length");
        self.times.push(t);
        self.angles.push(angle);
        self.intensities.extend_from_slice(row);
    }

    pub fn azimuth_count(&self) -> usize {
        self.times.len()
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn azimuth_time(&self, a: usize) -> f64 {
        self.times[a]
    }

    pub fn azimuth_angle(&self, a: usize) -> f64 {
        self.angles[a]
    }

    pub fn row(&self, a: usize) -> &[f32] {
        &self.intensities[a * self.bin_count..(a + 1) * self.bin_count]
    }

    pub fn row_mut(&mut self, a: usize) -> &mut [f32] {
        &mut self.intensities[a * self.bin_count..(a + 1) * self.bin_count]
    }

    pub fn intensities(&self) -> &[f32] {
        &self.intensities
    }

    /// Checks the record invariants: intensities in [0, 1], azimuth
    /// timestamps non-decreasing within one rotation period, and angles
    /// monotonic modulo 2π.
    pub fn validate(&self, rotation_period: f64) -> Result<(), ScanError> {
        if !(self.bin_size > 0.0) {
            return Err(ScanError(format!("bin size {} must be > 0", self.bin_size)));
        }
        if let Some((i, v)) = self
            .intensities
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && **v <= 1.0))
        {
            let (a, b) = (i / self.bin_count.max(1), i % self.bin_count.max(1));
            return Err(ScanError(format!(
                "intensity {v} at azimuth {a}, bin {b} is outside [0, 1]"
            )));
        }
        for w in self.times.windows(2) {
            if w[1] < w[0] {
                return Err(ScanError("azimuth timestamps decrease".into()));
            }
        }
        if let (Some(first), Some(last)) = (self.times.first(), self.times.last()) {
            if last - first > rotation_period + 1e-9 {
                return Err(ScanError(format!(
                    "azimuth timestamps span {} s, more than one rotation",
                    last - first
                )));
            }
        }
        let mut unwrapped = 0.0;
        for w in self.angles.windows(2) {
            let mut step = (w[1] - w[0]) % TAU;
            if step < 0.0 {
                step += TAU;
            }
            unwrapped += step;
        }
        if unwrapped > TAU + 1e-9 {
            return Err(ScanError("azimuth angles wrap more than once".into()));
        }
        Ok(())
    }
}

/// One lidar return in the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarPoint {
    pub t: f64,
    pub position: [f32; 3],
    pub intensity: f32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LidarScanRecord {
    pub start_t: f64,
    pub points: Vec<LidarPoint>,
}

impl LidarScanRecord {
    pub fn validate(&self, scan_period: f64) -> Result<(), ScanError> {
        for (i, p) in self.points.iter().enumerate() {
            if !(p.t >= self.start_t - 1e-9 && p.t <= self.start_t + scan_period + 1e-9) {
                return Err(ScanError(format!(
                    "lidar point {i} at t={} lies outside the scan period",
                    p.t
                )));
            }
            if !p.position.iter().all(|v| v.is_finite()) {
                return Err(ScanError(format!("lidar point {i} is not finite")));
            }
            if !(p.intensity >= 0.0 && p.intensity <= 1.0) {
                return Err(ScanError(format!(
                    "lidar point {i} intensity {} is outside [0, 1]",
                    p.intensity
                )));
            }
        }
        Ok(())
    }
}
