//! Prints range, detection and ground-error figures for the built-in
//! scenarios. Usage: `cargo run --release --example probe -- [reference|barrier|undulating]...`

use std::time::Instant;

use rtmap::analysis::{detection_range, diff_series, range_report, ScanSource};
use rtmap::replay::Sensor;
use rtmap::scenarios;
use rtmap::simulate::SimRun;
use rtmap_core::eval::effective_range;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    for mut sc in scenarios::all() {
        // Diagnostic overrides.
        let env = |k: &str| std::env::var(k).ok().and_then(|v| v.parse::<f64>().ok());
        if let (Some(a), "undulating") = (env("AMP"), sc.name) {
            sc = scenarios::undulating_with(a, env("SPEED").unwrap_or(2.5));
        }
        if let Some(v) = env("NOISE_MEAN") {
            sc.config.sim.noise_mean = v;
        }
        if let Some(v) = env("NOISE_STD") {
            sc.config.sim.noise_std = v;
        }
        if let Some(v) = env("GROUND_RHO") {
            sc.scene.ground_reflectivity = v;
        }
        if let Some(v) = env("TILT_DEG") {
            sc.config.radar.mount_tilt = v.to_radians();
        }
        if let Some(v) = env("MOUNT_Z") {
            sc.config.radar.mount_translation[2] = v;
        }
        if let Some(v) = env("EL_BEAM_DEG") {
            sc.config.sim.elevation_beamwidth = v.to_radians();
        }
        if !names.is_empty() && !names.iter().any(|n| n == sc.name) {
            continue;
        }
        let run = SimRun::new(&sc.scene, sc.trajectory.clone(), &sc.config)?;
        println!(
            "== {}: {} radar, {} lidar scans",
            sc.name,
            run.radar_count(),
            run.lidar_count()
        );
        let clock = Instant::now();
        match sc.name {
            "reference" => {
                let floor = sc.config.eval.floor_pct;
                for thr in [0.26, 0.31] {
                    let r = range_report(&run, &sc.config, Sensor::Radar, thr, 1.0)?;
                    println!(
                        "radar@{thr}: points {} eff {} max {:.1}",
                        r.points,
                        effective_range(&r.histogram, floor),
                        r.max_range
                    );
                    let pct = r.histogram.percentages();
                    let tail: Vec<String> = pct
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i % 10 == 0)
                        .map(|(i, p)| format!("{i}:{p:.2}"))
                        .collect();
                    println!("  {}", tail.join(" "));
                }
                let l = range_report(&run, &sc.config, Sensor::Lidar, 0.0, 1.0)?;
                println!(
                    "lidar: points {} eff {} max {:.1}",
                    l.points,
                    effective_range(&l.histogram, floor),
                    l.max_range
                );
            }
            "barrier" | "smoke" => {
                let target = sc.target.unwrap();
                for sensor in [Sensor::Radar, Sensor::Lidar] {
                    let t0 = Instant::now();
                    let d = detection_range(&run, &sc.config, sensor, 0.26, &target, 2)?;
                    let flagged: Vec<String> = d
                        .series
                        .iter()
                        .filter(|s| s.2)
                        .take(6)
                        .map(|s| format!("{:.1}", s.1))
                        .collect();
                    println!(
                        "{sensor}: {:?} first flags {:?} ({:.1}s)",
                        d.event,
                        flagged,
                        t0.elapsed().as_secs_f64()
                    );
                }
            }
            "undulating" => {
                let frames = diff_series(&run, &sc.config, 0.26)?;
                let mut worst = 0.0f64;
                let mut good = 0;
                for f in &frames {
                    worst = worst.max(f.diff.mean_abs_error);
                    if f.diff.mean_abs_error <= 0.3 {
                        good += 1;
                    }
                    if f.radar_frame % 20 == 0 {
                        println!(
                            "frame {} t {:.2}: mae {:.3} std {:.3} n {} radar-only {}",
                            f.radar_frame,
                            f.t,
                            f.diff.mean_abs_error,
                            f.diff.std_dev,
                            f.diff.compared,
                            f.diff.radar_only
                        );
                    }
                }
                let max_std = frames.iter().map(|f| f.diff.std_dev).fold(0.0, f64::max);
                println!(
                    "frames {} worst mae {worst:.3} max std {max_std:.3} <=0.3: {good}",
                    frames.len()
                );
            }
            _ => {}
        }
        println!("elapsed {:.1}s", clock.elapsed().as_secs_f64());
    }
    Ok(())
}
