//! Radar-first off-road terrain mapping.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every pure part of
//! the pipeline:
//!
//! * [`frontend`]: detection thresholding and motion-compensated projection of
//!   polar radar sweeps and lidar scans into world-frame points.
//! * [`voxel`]: the rolling, vehicle-centred voxel grid that keeps a hit count
//!   and an intensity sum per cell.
//! * [`terrain`]: ground, slope, obstacle, validity and cost rasters.
//! * [`sim`]: a cone/ray sensor simulator over parametric scenes.
//! * [`eval`]: range histograms, height-map differences and detection ranges.
//!
//! File formats, the dataset layout and the command line live in the `rtmap`
//! crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod config;
pub mod error;
pub mod eval;
pub mod frontend;
pub mod geometry;
pub mod pipeline;
pub mod pose;
pub mod raster;
pub mod scan;
pub mod sim;
pub mod terrain;
pub mod voxel;

pub use config::{GridConfig, LidarConfig, RadarConfig, TerrainConfig};
pub use error::{ConfigError, PoseError};
pub use frontend::SensorPoint;
pub use geometry::{Pose, Vec3};
pub use pose::{OdometrySample, Odometry, PoseSource};
pub use raster::RasterMap;
pub use scan::{LidarPoint, LidarScanRecord, RadarScanRecord};
pub use terrain::TerrainStack;
pub use voxel::VoxelGrid;
