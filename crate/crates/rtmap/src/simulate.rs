//! In-memory simulated runs.

use rtmap_core::sim::{
    scan_rng, LidarSimulator, RadarSimulator, Scene, ScanKind, ScanSlot, Trajectory,
    TrajectorySpec,
};
use rtmap_core::{LidarScanRecord, Odometry, RadarScanRecord};

use crate::config::PipelineConfig;
use crate::error::Result;

/// A scene, a trajectory through it and the sensors, ready to produce scans
/// in any order. Scans are deterministic in the seed and their index.
pub struct SimRun<'a> {
    config: &'a PipelineConfig,
    trajectory: Trajectory,
    odometry: Odometry,
    schedule: Vec<ScanSlot>,
    radar: RadarSimulator<'a>,
    lidar: LidarSimulator<'a>,
}

impl<'a> SimRun<'a> {
    pub fn new(scene: &'a Scene, spec: TrajectorySpec, config: &'a PipelineConfig) -> Result<Self> {
        config.validate()?;
        scene.validate()?;
        let trajectory = Trajectory::new(spec, scene)?;
        let odometry = Odometry::new(trajectory.odometry(config.sim.odometry_rate_hz))?;
        let schedule = trajectory.schedule(config.radar.rotation_period, config.lidar.scan_period());
        Ok(Self {
            radar: RadarSimulator::new(scene, &config.radar, &config.sim),
            lidar: LidarSimulator::new(scene, &config.lidar),
            config,
            trajectory,
            odometry,
            schedule,
        })
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn odometry(&self) -> &Odometry {
        &self.odometry
    }

    /// All scans of both sensors in start-time order.
    pub fn schedule(&self) -> &[ScanSlot] {
        &self.schedule
    }

    pub fn count(&self, kind: ScanKind) -> usize {
        self.schedule.iter().filter(|s| s.kind == kind).count()
    }

    pub fn radar_start(&self, index: usize) -> f64 {
        index as f64 * self.config.radar.rotation_period
    }

    pub fn lidar_start(&self, index: usize) -> f64 {
        index as f64 * self.config.lidar.scan_period()
    }

    pub fn radar_scan(&self, index: usize) -> Result<RadarScanRecord> {
        let mut rng = scan_rng(self.config.sim.seed, ScanKind::Radar, index);
        Ok(self
            .radar
            .scan(&self.trajectory, self.radar_start(index), &mut rng)?)
    }

    pub fn lidar_scan(&self, index: usize) -> Result<LidarScanRecord> {
        let mut rng = scan_rng(self.config.sim.seed, ScanKind::Lidar, index);
        Ok(self
            .lidar
            .scan(&self.trajectory, self.lidar_start(index), &mut rng)?)
    }
}

impl crate::analysis::ScanSource for SimRun<'_> {
    type Poses = Odometry;

    /// Mapping uses the sampled odometry, as it would for a recorded dataset.
    fn poses(&self) -> &Odometry {
        &self.odometry
    }

    fn radar_count(&self) -> usize {
        self.count(ScanKind::Radar)
    }

    fn lidar_count(&self) -> usize {
        self.count(ScanKind::Lidar)
    }

    fn radar_scan(&self, index: usize) -> Result<RadarScanRecord> {
        SimRun::radar_scan(self, index)
    }

    fn lidar_scan(&self, index: usize) -> Result<LidarScanRecord> {
        SimRun::lidar_scan(self, index)
    }
}
