//! The on-disk dataset: a manifest, an odometry CSV and one binary file per
//! scan.
//!
//! ```text
//! <root>/manifest.json
//! <root>/odometry.csv          t,x,y,z,qw,qx,qy,qz
//! <root>/radar/000000.bin      one radar sweep
//! <root>/lidar/000000.bin      one lidar sweep
//! ```
//!
//! All binary numbers are little-endian. A radar file holds
//! `"RDRS" u32:version u32:azimuths u32:bins f64:bin_size f64:start_t` and
//! then, per azimuth, `f64:t f64:angle` followed by `bins` f32 intensities.
//! A lidar file holds `"LDRS" u32:version u32:points f64:start_t` and then,
//! per point, `f64:t f32:x f32:y f32:z f32:intensity` in the sensor frame.
//! Scans are loaded lazily, one at a time.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rtmap_core::sim::ScanKind;
use rtmap_core::{
    LidarConfig, LidarPoint, LidarScanRecord, Odometry, OdometrySample, RadarConfig,
    RadarScanRecord,
};
use serde::{Deserialize, Serialize};

use crate::analysis::ScanSource;
use crate::error::{Error, Result};

pub const DATASET_VERSION: u32 = 1;
pub const SCAN_FORMAT_VERSION: u32 = 1;
const RADAR_MAGIC: &[u8; 4] = b"RDRS";
const LIDAR_MAGIC: &[u8; 4] = b"LDRS";
const ODOMETRY_HEADER: [&str; 8] = ["t", "x", "y", "z", "qw", "qx", "qy", "qz"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanEntry {
    pub sensor: ScanKind,
    /// Relative to the dataset root.
    pub path: String,
    pub start_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub radar_config: RadarConfig,
    pub lidar_config: LidarConfig,
    pub scan_index: Vec<ScanEntry>,
    pub odometry_path: String,
}

impl Manifest {
    /// Checks version, ordering and that every referenced file exists.
    fn verify(&self, root: &Path, manifest_path: &Path) -> Result<()> {
        if self.version != DATASET_VERSION {
            return Err(Error::format(
                manifest_path,
                format!("unsupported dataset version {}", self.version),
            ));
        }
        self.radar_config.validate()?;
        self.lidar_config.validate()?;
        for (i, w) in self.scan_index.windows(2).enumerate() {
            if w[1].start_t < w[0].start_t {
                return Err(Error::format(
                    manifest_path,
                    format!("scan_index[{}] starts before the entry above it", i + 1),
                ));
            }
        }
        for rel in self
            .scan_index
            .iter()
            .map(|e| e.path.as_str())
            .chain(std::iter::once(self.odometry_path.as_str()))
        {
            let p = root.join(rel);
            if !p.is_file() {
                return Err(Error::io(
                    &p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file is missing"),
                ));
            }
        }
        Ok(())
    }
}

/// An opened dataset. Scans are read from disk on request.
#[derive(Debug, Clone)]
pub struct Dataset {
    root: PathBuf,
    manifest: Manifest,
    odometry: Odometry,
    radar: Vec<usize>,
    lidar: Vec<usize>,
}

/// Reads and verifies the manifest and odometry of a dataset directory.
pub fn read_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    Dataset::open(root)
}

impl Dataset {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let manifest_path = root.join("manifest.json");
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::format(&manifest_path, e.to_string()))?;
        manifest.verify(&root, &manifest_path)?;
        let odometry = read_odometry(&root.join(&manifest.odometry_path))?;
        let pick = |kind| {
            manifest
                .scan_index
                .iter()
                .enumerate()
                .filter(|(_, e)| e.sensor == kind)
                .map(|(i, _)| i)
                .collect()
        };
        Ok(Self {
            radar: pick(ScanKind::Radar),
            lidar: pick(ScanKind::Lidar),
            root,
            manifest,
            odometry,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn odometry(&self) -> &Odometry {
        &self.odometry
    }

    fn entry(&self, kind: ScanKind, index: usize) -> Result<&ScanEntry> {
        let list = match kind {
            ScanKind::Radar => &self.radar,
            ScanKind::Lidar => &self.lidar,
        };
        list.get(index)
            .map(|&i| &self.manifest.scan_index[i])
            .ok_or_else(|| Error::Eval(format!("no {kind:?} scan with index {index}")))
    }

    pub fn radar_scan(&self, index: usize) -> Result<RadarScanRecord> {
        let e = self.entry(ScanKind::Radar, index)?;
        let path = self.root.join(&e.path);
        let rec = read_radar_scan(&path)?;
        let cfg = &self.manifest.radar_config;
        if rec.bin_count() != cfg.bin_count as usize || rec.bin_size != cfg.bin_size {
            return Err(Error::format(
                &path,
                "bin count or bin size differs from the manifest radar_config",
            ));
        }
        rec.validate(cfg.rotation_period)
            .map_err(|m| Error::format(&path, m.0))?;
        Ok(rec)
    }

    pub fn lidar_scan(&self, index: usize) -> Result<LidarScanRecord> {
        let e = self.entry(ScanKind::Lidar, index)?;
        let path = self.root.join(&e.path);
        let rec = read_lidar_scan(&path)?;
        rec.validate(self.manifest.lidar_config.scan_period())
            .map_err(|m| Error::format(&path, m.0))?;
        Ok(rec)
    }
}

impl ScanSource for Dataset {
    type Poses = Odometry;

    fn poses(&self) -> &Odometry {
        &self.odometry
    }

    fn radar_count(&self) -> usize {
        self.radar.len()
    }

    fn lidar_count(&self) -> usize {
        self.lidar.len()
    }

    fn radar_scan(&self, index: usize) -> Result<RadarScanRecord> {
        Dataset::radar_scan(self, index)
    }

    fn lidar_scan(&self, index: usize) -> Result<LidarScanRecord> {
        Dataset::lidar_scan(self, index)
    }
}

/// Writes a dataset scan by scan; the manifest is written last by
/// [`DatasetWriter::finish`].
#[derive(Debug)]
pub struct DatasetWriter {
    root: PathBuf,
    manifest: Manifest,
    radar_written: usize,
    lidar_written: usize,
}

impl DatasetWriter {
    /// Prepares `root`. It must be missing or empty unless `force` is set, in
    /// which case its previous contents are removed.
    pub fn create(
        root: impl AsRef<Path>,
        force: bool,
        radar_config: RadarConfig,
        lidar_config: LidarConfig,
    ) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        prepare_output_dir(&root, force)?;
        for sub in ["radar", "lidar"] {
            let d = root.join(sub);
            fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
        Ok(Self {
            root,
            manifest: Manifest {
                version: DATASET_VERSION,
                radar_config,
                lidar_config,
                scan_index: Vec::new(),
                odometry_path: "odometry.csv".into(),
            },
            radar_written: 0,
            lidar_written: 0,
        })
    }

    pub fn add_radar(&mut self, scan: &RadarScanRecord) -> Result<()> {
        let rel = format!("radar/{:06}.bin", self.radar_written);
        write_radar_scan(&self.root.join(&rel), scan)?;
        self.radar_written += 1;
        self.push(ScanKind::Radar, rel, scan.start_t);
        Ok(())
    }

    pub fn add_lidar(&mut self, scan: &LidarScanRecord) -> Result<()> {
        let rel = format!("lidar/{:06}.bin", self.lidar_written);
        write_lidar_scan(&self.root.join(&rel), scan)?;
        self.lidar_written += 1;
        self.push(ScanKind::Lidar, rel, scan.start_t);
        Ok(())
    }

    fn push(&mut self, sensor: ScanKind, path: String, start_t: f64) {
        self.manifest.scan_index.push(ScanEntry {
            sensor,
            path,
            start_t,
        });
    }

    /// Writes the odometry and the manifest. Scans must have been added in
    /// start-time order.
    pub fn finish(self, odometry: &[OdometrySample]) -> Result<Manifest> {
        write_odometry(&self.root.join(&self.manifest.odometry_path), odometry)?;
        let path = self.root.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(self.manifest)
    }
}

/// Creates `dir`, or empties it when `force` is set. A non-empty directory
/// without `force` is an error.
pub fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() {
            if !force {
                return Err(Error::OutputNotEmpty(dir.to_path_buf()));
            }
            fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_odometry(path: &Path, samples: &[OdometrySample]) -> Result<()> {
    let io = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(ODOMETRY_HEADER).map_err(io)?;
    for s in samples {
        let [qw, qx, qy, qz] = s.wxyz();
        let p = s.position;
        // `Display` for f64 prints the shortest string that parses back exactly.
        let row = [s.t, p.x, p.y, p.z, qw, qx, qy, qz].map(|v| v.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_odometry(path: &Path) -> Result<Odometry> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .clone();
    if headers.iter().ne(ODOMETRY_HEADER) {
        return Err(Error::format(
            path,
            format!("expected columns {}", ODOMETRY_HEADER.join(",")),
        ));
    }
    let mut samples = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::format(path, format!("line {line}: {e}")))?;
        let mut v = [0.0f64; 8];
        for (k, field) in rec.iter().enumerate() {
            v[k] = field.trim().parse().map_err(|_| {
                Error::format(path, format!("line {line}: `{field}` is not a number"))
            })?;
        }
        samples.push(OdometrySample::from_raw(
            v[0],
            [v[1], v[2], v[3]],
            [v[4], v[5], v[6], v[7]],
        ));
    }
    Odometry::new(samples).map_err(|e| Error::format(path, e.to_string()))
}

pub fn encode_radar_scan(scan: &RadarScanRecord) -> Vec<u8> {
    let (na, nb) = (scan.azimuth_count(), scan.bin_count());
    let mut out = Vec::with_capacity(32 + na * (16 + 4 * nb));
    out.extend_from_slice(RADAR_MAGIC);
    out.extend_from_slice(&SCAN_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(na as u32).to_le_bytes());
    out.extend_from_slice(&(nb as u32).to_le_bytes());
    out.extend_from_slice(&scan.bin_size.to_le_bytes());
    out.extend_from_slice(&scan.start_t.to_le_bytes());
    for a in 0..na {
        out.extend_from_slice(&scan.azimuth_time(a).to_le_bytes());
        out.extend_from_slice(&scan.azimuth_angle(a).to_le_bytes());
        for v in scan.row(a) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn encode_lidar_scan(scan: &LidarScanRecord) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + scan.points.len() * 24);
    out.extend_from_slice(LIDAR_MAGIC);
    out.extend_from_slice(&SCAN_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(scan.points.len() as u32).to_le_bytes());
    out.extend_from_slice(&scan.start_t.to_le_bytes());
    for p in &scan.points {
        out.extend_from_slice(&p.t.to_le_bytes());
        for v in p.position {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&p.intensity.to_le_bytes());
    }
    out
}

/// Little-endian reader over a byte slice that reports short reads as format
/// errors.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let Some(chunk) = self.bytes.get(self.pos..end) else {
            return Err(Error::format(
                self.path,
                format!("truncated file: expected {what} at byte {}", self.pos),
            ));
        };
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        self.take::<4>(what).map(f32::from_le_bytes)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        self.take::<8>(what).map(f64::from_le_bytes)
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        if &self.take::<4>("magic tag")? != magic {
            return Err(Error::format(
                self.path,
                format!("missing {} magic tag", String::from_utf8_lossy(magic)),
            ));
        }
        let version = self.u32("version")?;
        if version != SCAN_FORMAT_VERSION {
            return Err(Error::format(
                self.path,
                format!("unsupported scan format version {version}"),
            ));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(
                self.path,
                format!("{} unexpected trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

/// Decodes a radar file. Record invariants are not checked here.
pub fn decode_radar_scan(bytes: &[u8], path: &Path) -> Result<RadarScanRecord> {
    let mut c = Cursor { bytes, pos: 0, path };
    c.header(RADAR_MAGIC)?;
    let na = c.u32("azimuth count")? as usize;
    let nb = c.u32("bin count")? as usize;
    let bin_size = c.f64("bin size")?;
    let start_t = c.f64("start time")?;
    let expected = 32 + na as u64 * (16 + 4 * nb as u64);
    if bytes.len() as u64 != expected {
        return Err(Error::format(
            path,
            format!(
                "{na} azimuths of {nb} bins need {expected} bytes, file has {}",
                bytes.len()
            ),
        ));
    }
    let mut rec = RadarScanRecord::with_capacity(start_t, bin_size, nb, na);
    let mut row = vec![0f32; nb];
    for _ in 0..na {
        let t = c.f64("azimuth time")?;
        let angle = c.f64("azimuth angle")?;
        for v in row.iter_mut() {
            *v = c.f32("intensity")?;
        }
        rec.push_azimuth(t, angle, &row);
    }
    c.finish()?;
    Ok(rec)
}

pub fn decode_lidar_scan(bytes: &[u8], path: &Path) -> Result<LidarScanRecord> {
    let mut c = Cursor { bytes, pos: 0, path };
    c.header(LIDAR_MAGIC)?;
    let n = c.u32("point count")? as usize;
    let start_t = c.f64("start time")?;
    let expected = 20 + n as u64 * 24;
    if bytes.len() as u64 != expected {
        return Err(Error::format(
            path,
            format!("{n} points need {expected} bytes, file has {}", bytes.len()),
        ));
    }
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let t = c.f64("point time")?;
        let position = [c.f32("x")?, c.f32("y")?, c.f32("z")?];
        let intensity = c.f32("intensity")?;
        points.push(LidarPoint {
            t,
            position,
            intensity,
        });
    }
    c.finish()?;
    Ok(LidarScanRecord { start_t, points })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub fn write_radar_scan(path: &Path, scan: &RadarScanRecord) -> Result<()> {
    write_bytes(path, &encode_radar_scan(scan))
}

pub fn write_lidar_scan(path: &Path, scan: &LidarScanRecord) -> Result<()> {
    write_bytes(path, &encode_lidar_scan(scan))
}

pub fn read_radar_scan(path: &Path) -> Result<RadarScanRecord> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_radar_scan(&bytes, path)
}

pub fn read_lidar_scan(path: &Path) -> Result<LidarScanRecord> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_lidar_scan(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_radar_file_is_a_format_error() {
        let mut rec = RadarScanRecord::new(0.0, 0.044, 2);
        rec.push_azimuth(0.0, 0.0, &[0.1, 0.2]);
        let bytes = encode_radar_scan(&rec);
        let p = Path::new("radar/000000.bin");
        assert_eq!(decode_radar_scan(&bytes, p).unwrap(), rec);
        let err = decode_radar_scan(&bytes[..bytes.len() - 1], p).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("000000.bin"), "{err}");
    }

    #[test]
    fn bad_magic_is_rejected() {
        let rec = LidarScanRecord::default();
        let mut bytes = encode_lidar_scan(&rec);
        bytes[0] = b'X';
        assert!(decode_lidar_scan(&bytes, Path::new("x.bin")).is_err());
    }
}
