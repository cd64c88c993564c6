//! Configuration shared by every pipeline stage.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::SessionConfig;
use crate::chaossim::{AffineResponder, Driver, OscillatorSystem, StationarityOptions, ZeroOneOptions};
use crate::error::{Error, Result};
use crate::noiseopt::SolverOptions;
use crate::prng::DEFAULT_DELAY_THRESHOLD;
use crate::probmodel::LogBase;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    /// Census file; the synthetic reference joint is used when absent.
    pub dataset: Option<PathBuf>,
    /// Category encoding; the bundled one when absent.
    pub encoding: Option<PathBuf>,
    /// Problem or dataset-summary JSON; takes precedence over `dataset`.
    pub problem: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Driver and responder shared by every simulation stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    pub driver: Driver,
    pub driver_ic: Vec<f64>,
    pub responder: AffineResponder,
    pub dt: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            driver: Driver::default(),
            driver_ic: vec![1.0, 1.0, 1.0],
            responder: AffineResponder::standard(),
            dt: 1e-3,
        }
    }
}

/// Two responders started apart to measure synchronization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyncConfig {
    pub responder_ics: [Vec<f64>; 2],
    pub t_end: f64,
    /// Row stride of exported trajectories.
    pub export_stride: usize,
}

impl Default for SyncConfig {
    fn default() -> Self {
        SyncConfig { responder_ics: [vec![150.0, 150.0], vec![-150.0, -150.0]], t_end: 20.0, export_stride: 10 }
    }
}

/// Long run whose output density defines the cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityConfig {
    pub responder_ic: Vec<f64>,
    pub t_start: f64,
    pub t_end: f64,
    /// Output sampling period.
    pub delta: f64,
    pub bins: usize,
    pub delay_threshold: f64,
    pub max_lag: usize,
    /// Symbols in the exported realization stream.
    pub stream_symbols: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            responder_ic: vec![150.0, 150.0],
            t_start: 50.0,
            t_end: 4050.0,
            delta: 1e-3,
            bins: 200,
            delay_threshold: DEFAULT_DELAY_THRESHOLD,
            max_lag: 20_000,
            stream_symbols: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    /// Largest admissible `sup |ζ|` on the synchronization run.
    pub state_bound: f64,
    pub zero_one: ZeroOneOptions,
    /// Sampling period and sample count for the 0-1 test.
    pub zero_one_delta: f64,
    pub zero_one_samples: usize,
    pub zero_one_threshold: f64,
    pub stationarity: StationarityOptions,
    pub max_ks: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            state_bound: 1e3,
            zero_one: ZeroOneOptions::default(),
            zero_one_delta: 0.2,
            zero_one_samples: 10_000,
            zero_one_threshold: 0.9,
            stationarity: StationarityOptions::default(),
            max_ks: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub base: LogBase,
    pub seed: u64,
    pub paths: Paths,
    pub solver: SolverOptions,
    pub system: SystemConfig,
    pub sync: SyncConfig,
    pub density: DensityConfig,
    pub check: CheckConfig,
    /// Driver, responder and `dt` are taken from `system`.
    pub channel: SessionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            base: LogBase::Two,
            seed: 0,
            paths: Paths::default(),
            solver: SolverOptions::default(),
            system: SystemConfig::default(),
            sync: SyncConfig::default(),
            density: DensityConfig::default(),
            check: CheckConfig::default(),
            channel: SessionConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

fn dims(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidArgument(format!("{name}: expected {n} components, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} has non-finite components")));
    }
    Ok(())
}

impl PipelineConfig {
    /// Loads JSON; missing fields take their defaults.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        crate::jsonio::read_file(path)
    }

    /// Overrides the seed of every randomized stage.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.channel.seed = seed;
        self.check.stationarity.seed = seed;
        self
    }

    /// Session settings with the shared system and base filled in.
    pub fn session(&self) -> SessionConfig {
        SessionConfig {
            driver: self.system.driver,
            driver_ic: self.system.driver_ic.clone(),
            responder: self.system.responder.clone(),
            dt: self.system.dt,
            ..self.channel.clone()
        }
    }

    pub fn stationarity(&self) -> StationarityOptions {
        StationarityOptions { dt: self.system.dt, ..self.check.stationarity.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        let s = &self.system;
        positive("system.dt", s.dt)?;
        dims("system.driver_ic", &s.driver_ic, s.driver.dim())?;
        let n = s.responder.dim();
        for (i, ic) in self.sync.responder_ics.iter().enumerate() {
            dims(&format!("sync.responder_ics[{i}]"), ic, n)?;
        }
        positive("sync.t_end", self.sync.t_end)?;
        if self.sync.export_stride == 0 {
            return Err(Error::InvalidArgument("sync.export_stride must be at least 1".into()));
        }
        let d = &self.density;
        dims("density.responder_ic", &d.responder_ic, n)?;
        positive("density.delta", d.delta)?;
        if !(0.0..d.t_end).contains(&d.t_start) {
            return Err(Error::InvalidArgument("density.t_start must lie in [0, t_end)".into()));
        }
        if d.bins == 0 || d.max_lag == 0 {
            return Err(Error::InvalidArgument("density.bins and density.max_lag must be positive".into()));
        }
        if !(d.delay_threshold > 0.0 && d.delay_threshold < 1.0) {
            return Err(Error::InvalidArgument("density.delay_threshold must lie in (0, 1)".into()));
        }
        let c = &self.check;
        positive("check.state_bound", c.state_bound)?;
        positive("check.zero_one_delta", c.zero_one_delta)?;
        if c.zero_one_samples < crate::chaossim::zero_one::MIN_SERIES_LEN {
            return Err(Error::InvalidArgument(format!(
                "check.zero_one_samples must be at least {}",
                crate::chaossim::zero_one::MIN_SERIES_LEN
            )));
        }
        positive("check.stationarity.delta", c.stationarity.delta)?;
        if !(c.max_ks > 0.0 && c.max_ks <= 1.0) {
            return Err(Error::InvalidArgument("check.max_ks must lie in (0, 1]".into()));
        }
        let ch = &self.channel;
        positive("channel.delta", ch.delta)?;
        dims("channel.server_ic", &ch.server_ic, n)?;
        dims("channel.station_ic", &ch.station_ic, n)?;
        if ch.n_queries == 0 || ch.drive_block == 0 {
            return Err(Error::InvalidArgument("channel.n_queries and channel.drive_block must be positive".into()));
        }
        for p in [&self.paths.dataset, &self.paths.encoding, &self.paths.problem].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, format!("{} does not exist", p.display()))));
            }
        }
        Ok(())
    }
}
