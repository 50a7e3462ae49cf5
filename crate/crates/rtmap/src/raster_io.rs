//! Raster files: a little-endian f32 payload, row-major and north-up, plus a
//! JSON sidecar with the geometry.
//!
//! Values pass through f32 on disk, so a raster read back equals the written
//! one after rounding each value to f32. Writing that raster again reproduces
//! the file byte for byte. NaN marks missing data.

use std::fs;
use std::path::{Path, PathBuf};

use rtmap_core::RasterMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterHeader {
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// World `(x, y)` of the north-west corner of cell `(0, 0)`.
    pub origin: [f64; 2],
    /// Always `"NaN"`.
    pub nodata: String,
    /// Always `"float32-le"`.
    pub dtype: String,
}

impl RasterHeader {
    fn of(map: &RasterMap) -> Self {
        Self {
            width: map.width,
            height: map.height,
            resolution: map.resolution,
            origin: map.origin,
            nodata: "NaN".into(),
            dtype: "float32-le".into(),
        }
    }
}

/// The sidecar path of a payload: same name with a `.json` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn encode_raster(map: &RasterMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(map.values.len() * 4);
    for &v in &map.values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Writes the payload to `path` and the header next to it.
pub fn write_raster(map: &RasterMap, path: &Path) -> Result<()> {
    fs::write(path, encode_raster(map)).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&RasterHeader::of(map)).expect("header serializes");
    fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
}

pub fn decode_raster(header: &RasterHeader, payload: &[u8], path: &Path) -> Result<RasterMap> {
    if header.nodata != "NaN" || header.dtype != "float32-le" {
        return Err(Error::format(
            path,
            "only float32-le rasters with NaN nodata are supported",
        ));
    }
    if !(header.resolution > 0.0 && header.resolution.is_finite()) {
        return Err(Error::format(path, "resolution must be finite and > 0"));
    }
    let cells = header.width as u64 * header.height as u64;
    if payload.len() as u64 != cells * 4 {
        return Err(Error::format(
            path,
            format!(
                "header declares {} x {} = {cells} cells, payload holds {} bytes",
                header.width,
                header.height,
                payload.len()
            ),
        ));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
        .collect();
    Ok(RasterMap {
        width: header.width,
        height: header.height,
        resolution: header.resolution,
        origin: header.origin,
        values,
    })
}

pub fn read_raster(path: &Path) -> Result<RasterMap> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let header: RasterHeader =
        serde_json::from_str(&text).map_err(|e| Error::format(&side, e.to_string()))?;
    let payload = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raster(&header, &payload, path)
}
