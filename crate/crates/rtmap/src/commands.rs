//! The `rtmap` subcommands as library calls. Each returns the JSON summary
//! the binary prints on standard output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rtmap_core::eval::{effective_range, heightmap_diff, ObjectBounds};
use rtmap_core::sim::{Scene, ScanKind, TrajectorySpec};
use rtmap_core::terrain::TerrainStack;
use rtmap_core::RasterMap;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::analysis::{common_window, detection_range, range_report, ScanSource};
use crate::config::PipelineConfig;
use crate::dataset::{prepare_output_dir, Dataset, DatasetWriter};
use crate::error::{Error, Result};
use crate::raster_io::{read_raster, write_raster};
use crate::replay::{Replayer, Sensor};
use crate::simulate::SimRun;
use crate::svg;

/// Parses a JSON file; syntax and schema errors carry the line and column.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let scene: Scene = load_json(path)?;
    scene.validate()?;
    Ok(scene)
}

/// A trajectory file: either a JSON `TrajectorySpec`, or (`.csv`) a table of
/// `x,y` waypoints driven at `sim.speed` with `sim.hold` seconds at the end.
pub fn load_trajectory(path: &Path, config: &PipelineConfig) -> Result<TrajectorySpec> {
    let spec = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut waypoints = Vec::new();
        for row in csv::Reader::from_reader(file).deserialize::<[f64; 2]>() {
            waypoints.push(row.map_err(|e| Error::parse(path, e.to_string()))?);
        }
        TrajectorySpec {
            waypoints,
            speed: config.sim.speed,
            hold: config.sim.hold,
        }
    } else {
        load_json(path)?
    };
    spec.validate()?;
    Ok(spec)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))
}

fn csv_row<I, S>(w: &mut csv::Writer<fs::File>, path: &Path, row: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| Error::format(path, e.to_string()))
}

fn csv_close(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Simulates a run and writes it as a dataset.
pub fn sim_gen(
    scene: &Path,
    trajectory: &Path,
    config: Option<&Path>,
    out: &Path,
    force: bool,
) -> Result<Value> {
    let scene = load_scene(scene)?;
    let config = PipelineConfig::load_or_default(config)?;
    let spec = load_trajectory(trajectory, &config)?;
    generate_dataset(&scene, spec, &config, out, force)
}

/// Writes every scheduled scan of a simulated run, then odometry and manifest.
pub fn generate_dataset(
    scene: &Scene,
    spec: TrajectorySpec,
    config: &PipelineConfig,
    out: &Path,
    force: bool,
) -> Result<Value> {
    let run = SimRun::new(scene, spec, config)?;
    let mut writer = DatasetWriter::create(out, force, config.radar.clone(), config.lidar.clone())?;
    for slot in run.schedule() {
        match slot.kind {
            ScanKind::Radar => writer.add_radar(&run.radar_scan(slot.index)?)?,
            ScanKind::Lidar => writer.add_lidar(&run.lidar_scan(slot.index)?)?,
        }
    }
    writer.finish(run.odometry().samples())?;
    Ok(json!({
        "command": "sim gen",
        "out": out.display().to_string(),
        "duration_s": run.trajectory().duration(),
        "path_length_m": run.trajectory().length(),
        "radar_scans": run.radar_count(),
        "lidar_scans": run.lidar_count(),
        "odometry_samples": run.odometry().samples().len(),
        "seed": config.sim.seed,
    }))
}

/// The pipeline configuration with the dataset's sensor geometry and an
/// optional threshold override.
pub fn effective_config(
    config: &PipelineConfig,
    dataset: &Dataset,
    threshold: Option<f64>,
) -> Result<PipelineConfig> {
    let mut cfg = config.clone();
    let recorded_threshold = cfg.radar.detection_threshold;
    cfg.radar = dataset.manifest().radar_config.clone();
    cfg.radar.detection_threshold = threshold.unwrap_or(recorded_threshold);
    cfg.lidar = dataset.manifest().lidar_config.clone();
    cfg.radar.validate()?;
    Ok(cfg)
}

pub const FRAMES_HEADER: [&str; 10] = [
    "frame",
    "t",
    "points",
    "integrated",
    "dropped",
    "shift_x",
    "shift_y",
    "shift_z",
    "valid_cells",
    "obstacle_cells",
];

/// Replays one sensor of a dataset and writes the terrain rasters of every
/// frame, `frames.csv` and `timing.csv`.
pub fn map_run(
    dataset: &Path,
    config: Option<&Path>,
    sensor: Sensor,
    threshold: Option<f64>,
    out: &Path,
) -> Result<Value> {
    let data = Dataset::open(dataset)?;
    let base = PipelineConfig::load_or_default(config)?;
    let cfg = effective_config(&base, &data, threshold)?;
    let thr = cfg.radar.detection_threshold;

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let frames_dir = out.join("frames");
    if frames_dir.exists() {
        fs::remove_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    }
    fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    let frames_path = out.join("frames.csv");
    let timing_path = out.join("timing.csv");
    let mut frames_csv = csv_writer(&frames_path)?;
    let mut timing_csv = csv_writer(&timing_path)?;
    csv_row(&mut frames_csv, &frames_path, FRAMES_HEADER)?;
    csv_row(&mut timing_csv, &timing_path, ["frame", "t", "seconds"])?;

    let mut replay = Replayer::new(sensor, &cfg, thr, data.odometry());
    let mut times = Vec::new();
    let mut total_points = 0usize;
    for i in 0..data.count(sensor) {
        // Reading the file is not part of the per-scan budget.
        let (radar, lidar) = match sensor {
            Sensor::Radar => (Some(data.radar_scan(i)?), None),
            Sensor::Lidar => (None, Some(data.lidar_scan(i)?)),
        };
        let clock = Instant::now();
        let info = match (&radar, &lidar) {
            (Some(r), _) => replay.radar(r)?,
            (_, Some(l)) => replay.lidar(l)?,
            _ => unreachable!(),
        };
        let stack = replay
            .pipeline()
            .terrain_stack()
            .expect("grid exists after a frame");
        let seconds = clock.elapsed().as_secs_f64();
        times.push(seconds);
        total_points += info.points;

        let dir = frames_dir.join(format!("{:06}", info.index));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (name, raster) in stack.layers() {
            write_raster(raster, &dir.join(format!("{name}.bin")))?;
        }
        let shift = info.stats.shift.unwrap_or([0, 0, 0]);
        let valid = stack.validity.values.iter().filter(|&&v| v != 0.0).count();
        let obstacles = stack.obstacle.values.iter().filter(|&&v| v != 0.0).count();
        csv_row(
            &mut frames_csv,
            &frames_path,
            [
                info.index.to_string(),
                info.t.to_string(),
                info.points.to_string(),
                info.stats.integrated.to_string(),
                info.stats.dropped.to_string(),
                shift[0].to_string(),
                shift[1].to_string(),
                shift[2].to_string(),
                valid.to_string(),
                obstacles.to_string(),
            ],
        )?;
        csv_row(
            &mut timing_csv,
            &timing_path,
            [info.index.to_string(), info.t.to_string(), format!("{seconds:.6}")],
        )?;
    }
    csv_close(frames_csv, &frames_path)?;
    csv_close(timing_csv, &timing_path)?;
    Ok(json!({
        "command": "map run",
        "sensor": sensor.name(),
        "threshold": if sensor == Sensor::Radar { Some(thr) } else { None },
        "frames": times.len(),
        "points": total_points,
        "median_frame_ms": median(&times).map(|s| s * 1e3),
        "out": out.display().to_string(),
    }))
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn threshold_tag(t: f64) -> String {
    format!("{t:.2}").replace('.', "p")
}

/// Range histograms of one sensor, one CSV per threshold.
pub fn eval_hist(
    dataset: &Path,
    config: Option<&Path>,
    sensor: Sensor,
    thresholds: &[f64],
    out: &Path,
) -> Result<Vec<Value>> {
    let data = Dataset::open(dataset)?;
    let base = PipelineConfig::load_or_default(config)?;
    let eval = &base.eval;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let thresholds: Vec<Option<f64>> = match sensor {
        Sensor::Lidar => vec![None],
        Sensor::Radar if thresholds.is_empty() => vec![Some(base.radar.detection_threshold)],
        Sensor::Radar => thresholds.iter().copied().map(Some).collect(),
    };
    let mut summaries = Vec::new();
    for thr in thresholds {
        let cfg = effective_config(&base, &data, thr)?;
        let t = cfg.radar.detection_threshold;
        let report = range_report(&data, &cfg, sensor, t, eval.bin_width)?;
        let stem = match thr {
            Some(t) => format!("hist_{sensor}_{}", threshold_tag(t)),
            None => format!("hist_{sensor}"),
        };
        let path = out.join(format!("{stem}.csv"));
        let mut w = csv_writer(&path)?;
        csv_row(&mut w, &path, ["bin_start_m", "bin_end_m", "count", "percent"])?;
        let pct = report.histogram.percentages();
        for (i, (&count, p)) in report.histogram.counts.iter().zip(&pct).enumerate() {
            let lo = i as f64 * eval.bin_width;
            csv_row(
                &mut w,
                &path,
                [
                    lo.to_string(),
                    (lo + eval.bin_width).to_string(),
                    count.to_string(),
                    p.to_string(),
                ],
            )?;
        }
        csv_close(w, &path)?;
        if eval.svg {
            let title = match thr {
                Some(t) => format!("{sensor} range histogram, threshold {t}"),
                None => format!("{sensor} range histogram"),
            };
            write_text(
                &out.join(format!("{stem}.svg")),
                &svg::bar_chart(&title, eval.bin_width, &pct),
            )?;
        }
        summaries.push(json!({
            "command": "eval hist",
            "sensor": sensor.name(),
            "threshold": thr,
            "points": report.points,
            "effective_range_m": effective_range(&report.histogram, eval.floor_pct),
            "max_range_m": report.max_range,
            "csv": path.display().to_string(),
        }));
    }
    Ok(summaries)
}

/// One row of a `map run` frames table.
#[derive(Debug, Clone, Deserialize)]
pub struct FrameRow {
    pub frame: usize,
    pub t: f64,
    pub points: usize,
    pub integrated: usize,
    pub dropped: usize,
    pub shift_x: i64,
    pub shift_y: i64,
    pub shift_z: i64,
    pub valid_cells: usize,
    pub obstacle_cells: usize,
}

pub fn read_frames(run: &Path) -> Result<Vec<FrameRow>> {
    let path = run.join("frames.csv");
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<Vec<FrameRow>, _>>()
        .map_err(|e| Error::format(&path, e.to_string()))
}

pub fn frame_raster(run: &Path, frame: usize, layer: &str) -> Result<RasterMap> {
    read_raster(&run.join("frames").join(format!("{frame:06}")).join(format!("{layer}.bin")))
}

/// Per-frame ground error of a radar run against a lidar run.
///
/// Each radar frame is paired with the latest lidar frame at or before its
/// time; both ground rasters are cropped to their common window.
pub fn eval_diff(radar_run: &Path, lidar_run: &Path, config: Option<&Path>, out: &Path) -> Result<Value> {
    let base = PipelineConfig::load_or_default(config)?;
    let radar = read_frames(radar_run)?;
    let lidar = read_frames(lidar_run)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("diff.csv");
    let mut w = csv_writer(&path)?;
    csv_row(
        &mut w,
        &path,
        [
            "radar_frame",
            "t",
            "lidar_frame",
            "mean_abs_error_m",
            "std_dev_m",
            "compared_cells",
            "radar_only_cells",
        ],
    )?;
    let (mut ts, mut means, mut stds) = (Vec::new(), Vec::new(), Vec::new());
    let mut li = 0usize;
    for r in &radar {
        while li < lidar.len() && lidar[li].t <= r.t {
            li += 1;
        }
        let Some(l) = li.checked_sub(1).map(|k| &lidar[k]) else {
            continue;
        };
        let rg = frame_raster(radar_run, r.frame, "ground")?;
        let lg = frame_raster(lidar_run, l.frame, "ground")?;
        let (a, b) = common_window(&rg, &lg)?;
        let d = heightmap_diff(&a, &b)?;
        csv_row(
            &mut w,
            &path,
            [
                r.frame.to_string(),
                r.t.to_string(),
                l.frame.to_string(),
                d.mean_abs_error.to_string(),
                d.std_dev.to_string(),
                d.compared.to_string(),
                d.radar_only.to_string(),
            ],
        )?;
        ts.push(r.t);
        means.push(d.mean_abs_error);
        stds.push(d.std_dev);
    }
    csv_close(w, &path)?;
    if base.eval.svg {
        write_text(
            &out.join("diff.svg"),
            &svg::line_chart(
                "radar vs lidar ground error",
                &ts,
                &[("mean abs error, m", &means), ("std dev, m", &stds)],
            ),
        )?;
    }
    let n = means.len();
    let under = means.iter().filter(|&&m| m <= 0.3).count();
    Ok(json!({
        "command": "eval diff",
        "frames": n,
        "max_mean_abs_error_m": means.iter().copied().fold(0.0, f64::max),
        "max_std_dev_m": stds.iter().copied().fold(0.0, f64::max),
        "share_mean_at_most_0p3": if n > 0 { under as f64 / n as f64 } else { 0.0 },
        "csv": path.display().to_string(),
    }))
}

/// Detection range of an object for both sensors.
pub fn eval_detect(
    dataset: &Path,
    config: Option<&Path>,
    object: &Path,
    threshold: Option<f64>,
    out: &Path,
) -> Result<Value> {
    let data = Dataset::open(dataset)?;
    let base = PipelineConfig::load_or_default(config)?;
    let bounds: ObjectBounds = load_json(object)?;
    if !(bounds.min[0] < bounds.max[0] && bounds.min[1] < bounds.max[1]) {
        return Err(Error::parse(object, "object bounds need min < max on both axes"));
    }
    let cfg = effective_config(&base, &data, threshold)?;
    let thr = cfg.radar.detection_threshold;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("detect.csv");
    let mut w = csv_writer(&path)?;
    csv_row(&mut w, &path, ["sensor", "frame", "t", "range_m", "obstacle"])?;
    let mut result = serde_json::Map::new();
    for sensor in [Sensor::Radar, Sensor::Lidar] {
        let report = detection_range(&data, &cfg, sensor, thr, &bounds, base.eval.debounce_frames)?;
        for (frame, (t, range, flagged)) in report.series.iter().enumerate() {
            csv_row(
                &mut w,
                &path,
                [
                    sensor.name().to_string(),
                    frame.to_string(),
                    t.to_string(),
                    range.to_string(),
                    u8::from(*flagged).to_string(),
                ],
            )?;
        }
        let v = match report.event {
            Some(e) => json!({ "range_m": e.range, "t": e.t, "frame": e.frame }),
            None => Value::Null,
        };
        result.insert(sensor.name().into(), v);
    }
    csv_close(w, &path)?;
    let ratio = match (
        result["radar"].get("range_m").and_then(Value::as_f64),
        result["lidar"].get("range_m").and_then(Value::as_f64),
    ) {
        (Some(r), Some(l)) if l > 0.0 => Some(r / l),
        _ => None,
    };
    Ok(json!({
        "command": "eval detect",
        "threshold": thr,
        "radar": result["radar"],
        "lidar": result["lidar"],
        "radar_to_lidar": ratio,
        "csv": path.display().to_string(),
    }))
}

/// Writes a scenario's scene, trajectory, config and target as preset files.
pub fn write_preset(dir: &Path, scenario: &crate::scenarios::Scenario) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: String, value: String| -> Result<()> {
        let p = dir.join(name);
        write_text(&p, &(value + "\n"))?;
        written.push(p);
        Ok(())
    };
    let n = scenario.name;
    put(format!("{n}.scene.json"), serde_json::to_string_pretty(&scenario.scene).expect("scene"))?;
    put(
        format!("{n}.trajectory.json"),
        serde_json::to_string_pretty(&scenario.trajectory).expect("trajectory"),
    )?;
    put(format!("{n}.config.json"), scenario.config.to_json_pretty())?;
    if let Some(t) = &scenario.target {
        put(format!("{n}.object.json"), serde_json::to_string_pretty(t).expect("bounds"))?;
    }
    Ok(written)
}

/// Recomputes one frame's terrain stack from a run directory's layers; used
/// to check that written rasters match an in-memory replay.
pub fn read_stack(run: &Path, frame: usize) -> Result<TerrainStack> {
    Ok(TerrainStack {
        ground: frame_raster(run, frame, "ground")?,
        slope: frame_raster(run, frame, "slope")?,
        obstacle: frame_raster(run, frame, "obstacle")?,
        validity: frame_raster(run, frame, "validity")?,
        cost: frame_raster(run, frame, "cost")?,
    })
}

/// Empties or creates an output directory for a fresh run.
pub fn fresh_dir(dir: &Path, force: bool) -> Result<()> {
    prepare_output_dir(dir, force)
}
