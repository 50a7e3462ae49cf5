//! `rtmap`: simulate datasets, build terrain maps from them, evaluate maps.
//!
//! Machine-readable results go to stdout as JSON lines; everything meant for
//! people goes to stderr. Exit codes: 0 success, 1 other failure, 2 bad
//! configuration or input document, 3 I/O or file format, 4 pose gap,
//! 5 misaligned rasters.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rtmap::commands;
use rtmap::replay::Sensor;
use rtmap::Result;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "rtmap", version, about = "Radar terrain mapping pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated datasets.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Terrain map building.
    #[command(subcommand)]
    Map(MapCommand),
    /// Range, ground and detection analyses.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Subcommand)]
enum SimCommand {
    /// Simulate a drive and write it as a dataset.
    Gen {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Replace a non-empty output directory.
        #[arg(long)]
        force: bool,
    },
    /// Write the built-in scenarios as scene, trajectory, config and object files.
    Presets {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum MapCommand {
    /// Replay one sensor of a dataset and write per-frame terrain rasters.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        sensor: Sensor,
        /// Radar detection threshold; overrides the config.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct HistArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    sensor: Sensor,
    /// Radar threshold; repeat for several histograms.
    #[arg(long)]
    threshold: Vec<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Range histogram, effective and maximum range.
    Hist(HistArgs),
    /// Per-frame ground error of a radar run against a lidar run.
    Diff {
        /// Output directory of a radar `map run`.
        #[arg(long)]
        radar: PathBuf,
        /// Output directory of a lidar `map run`.
        #[arg(long)]
        lidar: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Range at which each sensor first flags an object as an obstacle.
    Detect {
        #[arg(long)]
        dataset: PathBuf,
        /// JSON `{ "min": [x, y], "max": [x, y] }` footprint of the object.
        #[arg(long)]
        object: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<Vec<Value>> {
    Ok(match cli.command {
        Command::Sim(SimCommand::Gen { scene, trajectory, config, out, force }) => {
            vec![commands::sim_gen(&scene, &trajectory, config.as_deref(), &out, force)?]
        }
        Command::Sim(SimCommand::Presets { out }) => {
            let mut files = Vec::new();
            for s in rtmap::scenarios::all() {
                files.extend(commands::write_preset(&out, &s)?);
            }
            vec![serde_json::json!({
                "command": "sim presets",
                "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            })]
        }
        Command::Map(MapCommand::Run { dataset, config, sensor, threshold, out }) => {
            vec![commands::map_run(&dataset, config.as_deref(), sensor, threshold, &out)?]
        }
        Command::Eval(EvalCommand::Hist(a)) => {
            commands::eval_hist(&a.dataset, a.config.as_deref(), a.sensor, &a.threshold, &a.out)?
        }
        Command::Eval(EvalCommand::Diff { radar, lidar, config, out }) => {
            vec![commands::eval_diff(&radar, &lidar, config.as_deref(), &out)?]
        }
        Command::Eval(EvalCommand::Detect { dataset, object, threshold, config, out }) => {
            vec![commands::eval_detect(&dataset, config.as_deref(), &object, threshold, &out)?]
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rtmap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
