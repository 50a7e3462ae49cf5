//! Whole-run analyses over any source of scans: range histograms, detection
//! ranges and radar-vs-lidar ground comparisons.
//!
//! The same code runs on a dataset read from disk and on an in-memory
//! simulated run, so the command line and the tests agree exactly.

use rtmap_core::eval::{
    heightmap_diff, DetectionEvent, DetectionTracker, HeightDiff, ObjectBounds, RangeHistogram,
};
use rtmap_core::frontend::sensor_origin;
use rtmap_core::terrain::estimate_ground;
use rtmap_core::{LidarScanRecord, PoseSource, RadarScanRecord, RasterMap};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::replay::{lidar_frame_time, radar_frame_time, radar_points, lidar_points, Replayer, Sensor};

/// Scans of both sensors plus the poses to place them with.
pub trait ScanSource {
    type Poses: PoseSource + ?Sized;
    fn poses(&self) -> &Self::Poses;
    fn radar_count(&self) -> usize;
    fn lidar_count(&self) -> usize;
    fn radar_scan(&self, index: usize) -> Result<RadarScanRecord>;
    fn lidar_scan(&self, index: usize) -> Result<LidarScanRecord>;

    fn count(&self, sensor: Sensor) -> usize {
        match sensor {
            Sensor::Radar => self.radar_count(),
            Sensor::Lidar => self.lidar_count(),
        }
    }
}

/// Ranges of every point of one sensor over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeReport {
    pub histogram: RangeHistogram,
    pub max_range: f64,
    pub points: usize,
}

/// Range histogram and maximum range over all scans of `sensor`. Ranges are
/// taken from the sensor origin at each point's own timestamp. `threshold`
/// only applies to the radar.
pub fn range_report<S: ScanSource>(
    src: &S,
    config: &PipelineConfig,
    sensor: Sensor,
    threshold: f64,
    bin_width: f64,
) -> Result<RangeReport> {
    let mut histogram = RangeHistogram::new(bin_width).map_err(|e| Error::Eval(e.to_string()))?;
    let mut max_range = 0.0f64;
    let mut points = 0;
    let mount = match sensor {
        Sensor::Radar => config.radar.mount_translation,
        Sensor::Lidar => config.lidar.mount_translation,
    };
    for i in 0..src.count(sensor) {
        let pts = match sensor {
            Sensor::Radar => radar_points(&src.radar_scan(i)?, config, threshold, src.poses())?,
            Sensor::Lidar => lidar_points(&src.lidar_scan(i)?, config, src.poses())?,
        };
        // Points of one azimuth share a timestamp, so cache the origin.
        let mut cached: Option<(f64, rtmap_core::Vec3)> = None;
        for p in &pts {
            let origin = match cached {
                Some((t, o)) if t == p.t => o,
                _ => {
                    let o = sensor_origin(src.poses(), mount, p.t)?;
                    cached = Some((p.t, o));
                    o
                }
            };
            let r = (p.position - origin).norm();
            histogram.add(r);
            max_range = max_range.max(r);
        }
        points += pts.len();
    }
    if points == 0 {
        return Err(Error::Eval(format!("no {sensor} points to evaluate")));
    }
    Ok(RangeReport {
        histogram,
        max_range,
        points,
    })
}

/// Per-frame detection state of one sensor approaching an object.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub sensor: Sensor,
    pub frames: usize,
    pub event: Option<DetectionEvent>,
    /// Vehicle-object distance and obstacle flag of every frame.
    pub series: Vec<(f64, f64, bool)>,
}

/// Replays every scan of `sensor` and reports when the object first shows up
/// in the obstacle map for `debounce` consecutive frames.
pub fn detection_range<S: ScanSource>(
    src: &S,
    config: &PipelineConfig,
    sensor: Sensor,
    threshold: f64,
    bounds: &ObjectBounds,
    debounce: usize,
) -> Result<DetectionReport> {
    let mut replay = Replayer::new(sensor, config, threshold, src.poses());
    let mut tracker = DetectionTracker::new(debounce);
    let mut series = Vec::new();
    for i in 0..src.count(sensor) {
        let info = match sensor {
            Sensor::Radar => replay.radar(&src.radar_scan(i)?)?,
            Sensor::Lidar => replay.lidar(&src.lidar_scan(i)?)?,
        };
        let range = bounds.distance(&info.vehicle);
        let flagged = replay.pipeline().obstacle_within(bounds);
        tracker.observe(info.index, info.t, range, flagged);
        series.push((info.t, range, flagged));
    }
    Ok(DetectionReport {
        sensor,
        frames: replay.frames(),
        event: tracker.result(),
        series,
    })
}

/// Crops two rasters to the window they share. They must have the same
/// resolution and their origins must sit on the same cell lattice.
pub fn common_window(a: &RasterMap, b: &RasterMap) -> Result<(RasterMap, RasterMap)> {
    if a.resolution != b.resolution {
        return Err(Error::Misaligned(format!(
            "resolutions differ: {} vs {}",
            a.resolution, b.resolution
        )));
    }
    let res = a.resolution;
    let dx = (b.origin[0] - a.origin[0]) / res;
    let dy = (a.origin[1] - b.origin[1]) / res;
    let (cx, cy) = (dx.round(), dy.round());
    if (dx - cx).abs() > 1e-6 || (dy - cy).abs() > 1e-6 {
        return Err(Error::Misaligned(format!(
            "origins {:?} and {:?} are not on a common {res} m lattice",
            a.origin, b.origin
        )));
    }
    // Offsets of b's first column and row within a.
    let (cx, cy) = (cx as i64, cy as i64);
    let col0 = cx.max(0);
    let row0 = cy.max(0);
    let col1 = (a.width as i64).min(cx + b.width as i64);
    let row1 = (a.height as i64).min(cy + b.height as i64);
    if col1 <= col0 || row1 <= row0 {
        return Err(Error::Misaligned("rasters do not overlap".into()));
    }
    let (w, h) = ((col1 - col0) as usize, (row1 - row0) as usize);
    let origin = [
        a.origin[0] + col0 as f64 * res,
        a.origin[1] - row0 as f64 * res,
    ];
    let crop = |r: &RasterMap, c0: i64, r0: i64| {
        let mut out = RasterMap::nodata(w, h, res, origin);
        for row in 0..h {
            let src = (r0 as usize + row) * r.width + c0 as usize;
            out.values[row * w..(row + 1) * w].copy_from_slice(&r.values[src..src + w]);
        }
        out
    };
    Ok((crop(a, col0, row0), crop(b, col0 - cx, row0 - cy)))
}

/// Ground comparison of one radar frame against the latest lidar frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffFrame {
    pub radar_frame: usize,
    pub t: f64,
    pub lidar_frame: usize,
    pub diff: HeightDiff,
}

/// Compares two ground rasters over their common window.
pub fn ground_diff(radar: &RasterMap, lidar: &RasterMap) -> Result<HeightDiff> {
    let (r, l) = common_window(radar, lidar)?;
    heightmap_diff(&r, &l).map_err(|e| Error::Misaligned(e.to_string()))
}

/// Replays radar and lidar side by side. After each radar frame its ground is
/// compared with the ground of the latest lidar frame at or before it.
/// Radar frames with no earlier lidar frame are skipped.
pub fn diff_series<S: ScanSource>(
    src: &S,
    config: &PipelineConfig,
    threshold: f64,
) -> Result<Vec<DiffFrame>> {
    let mut radar = Replayer::new(Sensor::Radar, config, threshold, src.poses());
    let mut lidar = Replayer::new(Sensor::Lidar, config, threshold, src.poses());
    let mut next_lidar = 0;
    let mut pending: Option<LidarScanRecord> = None;
    let mut out = Vec::new();
    for i in 0..src.radar_count() {
        let scan = src.radar_scan(i)?;
        let t = radar_frame_time(&scan);
        loop {
            if pending.is_none() && next_lidar < src.lidar_count() {
                pending = Some(src.lidar_scan(next_lidar)?);
                next_lidar += 1;
            }
            match pending.take() {
                Some(l) if lidar_frame_time(&l) <= t => {
                    lidar.lidar(&l)?;
                }
                other => {
                    pending = other;
                    break;
                }
            }
        }
        radar.radar(&scan)?;
        let (Some(rg), Some(lg)) = (radar.pipeline().grid(), lidar.pipeline().grid()) else {
            continue;
        };
        let diff = ground_diff(&estimate_ground(rg).0, &estimate_ground(lg).0)?;
        out.push(DiffFrame {
            radar_frame: radar.frames() - 1,
            t,
            lidar_frame: lidar.frames() - 1,
            diff,
        });
    }
    Ok(out)
}
