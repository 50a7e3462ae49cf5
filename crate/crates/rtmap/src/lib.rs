//! Dataset and raster formats, simulated runs, map replay, evaluation and the
//! `rtmap` command line, on top of `rtmap-core`.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod raster_io;
pub mod replay;
pub mod scenarios;
pub mod simulate;
pub mod svg;

pub use config::{EvalOptions, PipelineConfig};
pub use error::{Error, Result};
