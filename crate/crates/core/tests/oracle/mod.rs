//! Brute-force reference implementations of the voxel and terrain stages.
//!
//! Everything here works on a dictionary of world cells and plain per-cell
//! loops, with no shared code beyond the public data types. Shared between
//! the core integration tests and the acceptance harness.

#![allow(dead_code)]

use std::collections::HashMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use rtmap_core::config::Retention;
use rtmap_core::pipeline::MapPipeline;
use rtmap_core::voxel::IntensityMode;
use rtmap_core::{GridConfig, SensorPoint, TerrainConfig, TerrainStack, Vec3, VoxelGrid};

/// A voxel map kept as `world cell -> (hits, intensity sum)`.
#[derive(Debug, Clone)]
pub struct DictGrid {
    pub dims: [usize; 3],
    pub res: f64,
    pub origin: [i64; 3],
    pub solid_threshold: f64,
    pub hits_only: bool,
    pub hysteresis: i64,
    pub cells: HashMap<[i64; 3], (u32, f64)>,
    pub dropped: u64,
}

impl DictGrid {
    pub fn new(config: &GridConfig, hits_only: bool, origin: [i64; 3]) -> Self {
        Self {
            dims: config.dims,
            res: config.resolution,
            origin,
            solid_threshold: config.solid_intensity_threshold,
            hits_only,
            hysteresis: config.recenter_hysteresis as i64,
            cells: HashMap::new(),
            dropped: 0,
        }
    }

    /// Grid-relative index of a point, if inside the window.
    pub fn index_of(&self, p: &Vec3) -> Option<[i64; 3]> {
        let mut idx = [0i64; 3];
        for a in 0..3 {
            let lo = self.origin[a] as f64 * self.res;
            let f = ((p[a] - lo) / self.res).floor();
            if f < 0.0 || f >= self.dims[a] as f64 {
                return None;
            }
            idx[a] = f as i64;
        }
        Some(idx)
    }

    pub fn integrate(&mut self, points: &[SensorPoint]) {
        for p in points {
            match self.index_of(&p.position) {
                Some(idx) => {
                    let key = [
                        self.origin[0] + idx[0],
                        self.origin[1] + idx[1],
                        self.origin[2] + idx[2],
                    ];
                    let e = self.cells.entry(key).or_insert((0, 0.0));
                    e.0 += 1;
                    e.1 += if self.hits_only { 1.0 } else { p.intensity };
                }
                None => self.dropped += 1,
            }
        }
    }

    fn in_window(&self, key: &[i64; 3]) -> bool {
        (0..3).all(|a| key[a] >= self.origin[a] && key[a] < self.origin[a] + self.dims[a] as i64)
    }

    /// Moves the window so it starts `d` cells further along each axis and
    /// forgets everything outside it.
    pub fn shift(&mut self, d: [i64; 3]) {
        for a in 0..3 {
            self.origin[a] += d[a];
        }
        let keep: Vec<[i64; 3]> = self.cells.keys().filter(|k| self.in_window(k)).copied().collect();
        self.cells.retain(|k, _| keep.contains(k));
    }

    pub fn recenter(&mut self, vehicle: &Vec3) {
        let mut d = [0i64; 3];
        for a in 0..3 {
            let c = (vehicle[a] / self.res).floor() as i64;
            let off = c - self.origin[a] - (self.dims[a] / 2) as i64;
            if off.abs() > self.hysteresis {
                d[a] = off;
            }
        }
        if d != [0; 3] {
            self.shift(d);
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> (u32, f64) {
        let key = [
            self.origin[0] + i as i64,
            self.origin[1] + j as i64,
            self.origin[2] + k as i64,
        ];
        self.cells.get(&key).copied().unwrap_or((0, 0.0))
    }

    pub fn center_z(&self, k: usize) -> f64 {
        (self.origin[2] as f64 + k as f64 + 0.5) * self.res
    }

    pub fn solid(&self, i: usize, j: usize, k: usize) -> bool {
        let (h, s) = self.get(i, j, k);
        h > 0 && s / h as f64 >= self.solid_threshold
    }

    /// Weighted ground of a column: weights are mean intensity times hits.
    pub fn ground(&self, i: usize, j: usize) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..self.dims[2] {
            let (h, s) = self.get(i, j, k);
            if h == 0 {
                continue;
            }
            let w = (s / h as f64) * h as f64;
            num += w * self.center_z(k);
            den += w;
        }
        (den > 0.0).then(|| num / den)
    }

    pub fn obstacle(&self, i: usize, j: usize, height: f64) -> bool {
        let Some(g) = self.ground(i, j) else {
            return false;
        };
        (0..self.dims[2]).any(|k| self.solid(i, j, k) && self.center_z(k) >= g + height)
    }
}

/// Slope of every column from a ground table indexed `[i][j]`, `n`-cell stencil.
pub fn slope_table(ground: &[Vec<Option<f64>>], res: f64, n: usize) -> Vec<Vec<Option<f64>>> {
    let nx = ground.len();
    let ny = ground[0].len();
    let at = |i: isize, j: isize| -> Option<f64> {
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            None
        } else {
            ground[i as usize][j as usize]
        }
    };
    let step = n as f64 * res;
    let d = |c: f64, lo: Option<f64>, hi: Option<f64>| match (lo, hi) {
        (Some(a), Some(b)) => Some((b - a) / (2.0 * step)),
        (Some(a), None) => Some((c - a) / step),
        (None, Some(b)) => Some((b - c) / step),
        (None, None) => None,
    };
    let n = n as isize;
    (0..nx as isize)
        .map(|i| {
            (0..ny as isize)
                .map(|j| {
                    let c = at(i, j)?;
                    let gx = d(c, at(i - n, j), at(i + n, j))?;
                    let gy = d(c, at(i, j - n), at(i, j + n))?;
                    Some((gx * gx + gy * gy).sqrt().atan())
                })
                .collect()
        })
        .collect()
}

/// Fused cost of one cell straight from the weighted-sum definition.
pub fn cost_of(valid: bool, slope: Option<f64>, obstacle: bool, cfg: &TerrainConfig) -> f64 {
    let wv = cfg.validity.weight * cfg.validity.cost;
    if !valid {
        return wv;
    }
    let s = slope.map_or(0.0, |s| s.min(cfg.slope_saturation) / cfg.slope_saturation);
    cfg.slope.weight * cfg.slope.cost * s + cfg.obstacle.weight * cfg.obstacle.cost * f64::from(u8::from(obstacle))
}

/// Compares a grid and its terrain stack against the dictionary oracle.
/// Integer fields must match exactly, floating fields within `1e-9`.
pub fn compare(grid: &VoxelGrid, oracle: &DictGrid, cfg: &TerrainConfig) -> Result<(), String> {
    let [nx, ny, nz] = grid.dims();
    if grid.origin() != oracle.origin {
        return Err(format!("origin {:?} vs oracle {:?}", grid.origin(), oracle.origin));
    }
    if grid.dropped() != oracle.dropped {
        return Err(format!("dropped {} vs oracle {}", grid.dropped(), oracle.dropped));
    }
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let c = grid.cell(i, j, k);
                let (h, s) = oracle.get(i, j, k);
                if c.hits != h || (c.intensity_sum - s).abs() > 1e-9 {
                    return Err(format!("cell {i},{j},{k}: ({}, {}) vs oracle ({h}, {s})", c.hits, c.intensity_sum));
                }
                if grid.is_solid(i, j, k) != oracle.solid(i, j, k) {
                    return Err(format!("solid {i},{j},{k} differs"));
                }
            }
        }
    }
    let stack = TerrainStack::compute(grid, cfg);
    let ground: Vec<Vec<Option<f64>>> =
        (0..nx).map(|i| (0..ny).map(|j| oracle.ground(i, j)).collect()).collect();
    let slope = slope_table(&ground, oracle.res, cfg.slope_neighborhood as usize);
    for i in 0..nx {
        for j in 0..ny {
            // North-up raster: column i, row counted from the top.
            let (row, col) = (ny - 1 - j, i);
            let g = stack.ground.get(row, col);
            let v = stack.validity.get(row, col);
            match ground[i][j] {
                Some(z) if v == 1.0 && (g - z).abs() <= 1e-9 => {}
                None if v == 0.0 && g.is_nan() => {}
                want => return Err(format!("ground {i},{j}: {g} (valid {v}) vs oracle {want:?}")),
            }
            let s = stack.slope.get(row, col);
            match slope[i][j] {
                Some(w) if (s - w).abs() <= 1e-9 => {}
                None if s.is_nan() => {}
                want => return Err(format!("slope {i},{j}: {s} vs oracle {want:?}")),
            }
            let o = oracle.obstacle(i, j, cfg.obstacle_height_threshold);
            if stack.obstacle.get(row, col) != f64::from(u8::from(o)) {
                return Err(format!("obstacle {i},{j}: {} vs oracle {o}", stack.obstacle.get(row, col)));
            }
            let want = cost_of(ground[i][j].is_some(), slope[i][j], o, cfg);
            let got = stack.cost.get(row, col);
            if (got - want).abs() > 1e-9 {
                return Err(format!("cost {i},{j}: {got} vs oracle {want}"));
            }
        }
    }
    Ok(())
}

/// A small grid configuration with random dimensions up to 16x16x8.
pub fn small_config(rng: &mut ChaCha8Rng) -> GridConfig {
    let d = |lo: usize, hi: usize, rng: &mut ChaCha8Rng| Uniform::new_inclusive(lo, hi).unwrap().sample(rng);
    GridConfig {
        dims: [d(2, 16, rng), d(2, 16, rng), d(2, 8, rng)],
        resolution: [0.25, 0.4, 0.5][d(0, 2, rng)],
        solid_intensity_threshold: Uniform::new(0.05, 0.6).unwrap().sample(rng),
        recenter_hysteresis: d(0, 2, rng) as u32,
        retention: Retention::Keep,
    }
}

/// Points scattered over and somewhat beyond a window of `cfg` around `center`.
pub fn scatter(rng: &mut ChaCha8Rng, cfg: &GridConfig, center: &Vec3, n: usize, t: f64) -> Vec<SensorPoint> {
    let unit = Uniform::new(-0.65, 0.65).unwrap();
    let inten = Uniform::new_inclusive(0.0, 1.0).unwrap();
    (0..n)
        .map(|_| {
            let p = Vec3::new(
                center.x + unit.sample(rng) * cfg.dims[0] as f64 * cfg.resolution,
                center.y + unit.sample(rng) * cfg.dims[1] as f64 * cfg.resolution,
                center.z + unit.sample(rng) * cfg.dims[2] as f64 * cfg.resolution,
            );
            SensorPoint {
                position: p,
                intensity: inten.sample(rng),
                t,
            }
        })
        .collect()
}

fn terrain_config(rng: &mut ChaCha8Rng) -> TerrainConfig {
    let u = |lo: f64, hi: f64, rng: &mut ChaCha8Rng| Uniform::new(lo, hi).unwrap().sample(rng);
    let mut cfg = TerrainConfig {
        obstacle_height_threshold: u(0.2, 2.0, rng),
        slope_neighborhood: Uniform::new_inclusive(1u32, 2).unwrap().sample(rng),
        slope_saturation: u(0.2, 1.5, rng),
        ..TerrainConfig::default()
    };
    for term in [&mut cfg.validity, &mut cfg.slope, &mut cfg.obstacle] {
        term.weight = u(0.0, 3.0, rng);
        term.cost = u(0.0, 100.0, rng);
    }
    cfg
}

/// Drives random multi-frame pipelines on small grids and compares every
/// stage against the oracle after each frame. Returns the number of frames
/// checked.
pub fn run_small_grid_cases(seed: u64, cases: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = 0;
    for case in 0..cases {
        let cfg = small_config(&mut rng);
        let terrain = terrain_config(&mut rng);
        let hits_only = case % 4 == 3;
        let mode = if hits_only { IntensityMode::HitsOnly } else { IntensityMode::Intensity };
        let mut pipeline = MapPipeline::new(cfg.clone(), terrain.clone(), mode);
        let mut oracle: Option<DictGrid> = None;
        let mut vehicle = Vec3::new(
            Uniform::new(-5.0, 5.0).unwrap().sample(&mut rng),
            Uniform::new(-5.0, 5.0).unwrap().sample(&mut rng),
            0.0,
        );
        let step = Uniform::new(-1.2, 1.2).unwrap();
        let count = Uniform::new_inclusive(0usize, 10_000 / 4).unwrap();
        for f in 0..4 {
            let n = count.sample(&mut rng);
            let pts = scatter(&mut rng, &cfg, &vehicle, n, f as f64);
            pipeline.process(&pts, &vehicle);
            let o = oracle.get_or_insert_with(|| {
                let r = cfg.resolution;
                let origin = core::array::from_fn(|a| (vehicle[a] / r).floor() as i64 - (cfg.dims[a] / 2) as i64);
                DictGrid::new(&cfg, hits_only, origin)
            });
            o.integrate(&pts);
            o.recenter(&vehicle);
            let grid = pipeline.grid().expect("grid after first frame");
            compare(grid, o, &terrain).map_err(|e| format!("case {case} frame {f}: {e}"))?;
            frames += 1;
            vehicle.x += step.sample(&mut rng);
            vehicle.y += step.sample(&mut rng);
            vehicle.z += 0.25 * step.sample(&mut rng);
        }
    }
    Ok(frames)
}
