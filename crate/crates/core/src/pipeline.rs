//! Stage functions behind the command line tool, the artifact layout they
//! write, and the hash manifest tying a run together.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::session::{connect_server, run_session, run_session_loopback, SessionConfig, SessionOutcome};
use crate::chaossim::certificate::convergence_certificate;
use crate::chaossim::integrate::{integrate, step_count, stride_of, Cascade, Trajectory};
use crate::chaossim::stationarity::{sample_output, stationarity_check, InitialCondition, StationarityReport};
use crate::chaossim::stats::{estimate_density, select_delay, DelaySelection, EmpiricalDistribution};
use crate::chaossim::sync::{sync_report, SyncReport};
use crate::chaossim::trajfile;
use crate::chaossim::zero_one::zero_one_chaos_test_with;
use crate::chaossim::{ConvergenceCertificate, OscillatorSystem};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::ingest::{self, AttributeEncoding, DatasetSummary, SyntheticJoint, REFERENCE_MUTUAL_INFORMATION};
use crate::jsonio;
use crate::noiseopt::{solve, NoiseDesignProblem, NoiseSolution, SolverOptions};
use crate::prng::{build_cells, generate_stream_live, CellPartition, RealizationStream, SampleSchedule};
use crate::probmodel::{LogBase, Pmf};

/// File names written into the output directory.
pub mod artifacts {
    pub const PROBLEM: &str = "problem.json";
    pub const DATASET_SUMMARY: &str = "dataset_summary.json";
    pub const SOLUTION: &str = "solution.json";
    pub const CHECK: &str = "check_report.json";
    pub const SYNC_REPORT: &str = "sync_report.json";
    pub const SYNC_ERROR: &str = "sync_error.csv";
    pub const DRIVER: &str = "driver.csv";
    pub const RESPONDERS: [&str; 2] = ["responder_1.csv", "responder_2.csv"];
    pub const OUTPUT_SERIES: &str = "output_series.cptj";
    pub const PARTITION: &str = "partition.json";
    pub const CELLS: &str = "cells_report.json";
    pub const DISTORTION: &str = "distortion_report.json";
    pub const MESSAGE_LOG: &str = "messages.bin";
    pub const RECOVERIES: &str = "recoveries.json";
    pub const MANIFEST: &str = "manifest.json";

    pub const FIG_TRAJECTORIES: &str = "fig4_trajectories.csv";
    pub const FIG_SYNC_ERROR: &str = "fig5_sync_error.csv";
    pub const FIG_DENSITY: &str = "fig6_density.csv";
    pub const FIG_CDF: &str = "fig7_cdf.csv";
    pub const FIG_CELLS: &str = "fig7_cells.csv";
    pub const FIG_STREAM: &str = "fig8_stream.csv";
    pub const FIG_PMF: &str = "fig8_pmf.csv";
}

// ---------------------------------------------------------------- problem

#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub problem: NoiseDesignProblem,
    /// Human-readable origin of the model.
    pub source: String,
    pub summary: Option<DatasetSummary>,
    pub synthetic: Option<SyntheticJoint>,
}

/// Reads either a problem JSON (`p_x`, `p_y_given_x`, `base`) or a
/// dataset summary (recognized by its `joint` field). `base` overrides the
/// base stored in the file.
pub fn read_problem(path: &Path, base: Option<LogBase>) -> Result<NoiseDesignProblem> {
    let value: serde_json::Value = jsonio::read_file(path)?;
    let ctx = || path.display().to_string();
    if value.get("joint").is_some() {
        let summary: DatasetSummary = serde_json::from_value(value).map_err(|e| Error::schema(ctx(), e))?;
        ingest::problem_from_summary(&summary, base.unwrap_or_default())
    } else {
        let p: NoiseDesignProblem = serde_json::from_value(value).map_err(|e| Error::schema(ctx(), e))?;
        Ok(match base {
            Some(b) => p.with_base(b),
            None => p,
        })
    }
}

/// The problem named by the configuration: an explicit file, a census
/// file, or the synthetic joint matching the published marginals.
pub fn load_problem(cfg: &PipelineConfig) -> Result<LoadedProblem> {
    if let Some(p) = &cfg.paths.problem {
        return Ok(LoadedProblem {
            problem: read_problem(p, Some(cfg.base))?,
            source: p.display().to_string(),
            summary: None,
            synthetic: None,
        });
    }
    if let Some(d) = &cfg.paths.dataset {
        let encoding = match &cfg.paths.encoding {
            Some(e) => AttributeEncoding::from_path(e)?,
            None => AttributeEncoding::default(),
        };
        let summary = ingest::load_adult(d, &encoding)?;
        return Ok(LoadedProblem {
            problem: ingest::problem_from_summary(&summary, cfg.base)?,
            source: d.display().to_string(),
            summary: Some(summary),
            synthetic: None,
        });
    }
    let s = ingest::synthetic_census_joint(cfg.seed, REFERENCE_MUTUAL_INFORMATION, cfg.base)?;
    Ok(LoadedProblem {
        problem: NoiseDesignProblem::from_joint(&s.joint, cfg.base)?,
        source: format!("synthetic census joint (seed {})", cfg.seed),
        summary: None,
        synthetic: Some(s),
    })
}

/// Solves and insists on convergence.
pub fn solve_converged(problem: &NoiseDesignProblem, opts: &SolverOptions) -> Result<NoiseSolution> {
    let sol = solve(problem, opts)?;
    if !sol.converged {
        return Err(Error::NotConverged { iterations: sol.iterations, kkt_residual: sol.kkt_residual });
    }
    Ok(sol)
}

// ------------------------------------------------------------------ check

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckStep {
    pub name: String,
    pub passed: bool,
    #[serde(deserialize_with = "jsonio::f64_or_nan")]
    pub value: f64,
    #[serde(deserialize_with = "jsonio::f64_or_nan")]
    pub limit: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub failed: Vec<String>,
    pub warnings: Vec<String>,
    pub steps: Vec<CheckStep>,
    pub certificate: Option<ConvergenceCertificate>,
    pub stationarity: Option<StationarityReport>,
}

impl CheckReport {
    pub fn step(&self, name: &str) -> Option<&CheckStep> {
        self.steps.iter().find(|s| s.name == name)
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::CheckFailed(self.failed))
        }
    }
}

/// Driver and responder outputs sampled every `delta` after `transient`,
/// plus the largest state magnitude seen on the way.
pub struct ChaosSeries {
    pub driver: Vec<f64>,
    pub responder: Vec<f64>,
    pub sup_norm: f64,
}

pub fn chaos_series(cfg: &PipelineConfig) -> Result<ChaosSeries> {
    let c = &cfg.check;
    let s = &cfg.system;
    let stride = stride_of(c.zero_one_delta, s.dt)?;
    let first = step_count(s.dt, c.stationarity.transient)?;
    let mut cascade = Cascade::new(&s.driver, &s.driver_ic, s.dt)?.with_responder(&s.responder, &cfg.sync.responder_ics[0])?;
    let mut out = ChaosSeries { driver: Vec::new(), responder: Vec::new(), sup_norm: 0.0 };
    let norm = |c: &Cascade| c.driver_state().iter().chain(c.responder_state(0)).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut k = 0;
    loop {
        out.sup_norm = out.sup_norm.max(norm(&cascade));
        if k >= first && (k - first) % stride == 0 {
            out.driver.push(cascade.driver_output());
            out.responder.push(cascade.responder_output(0));
            if out.driver.len() == c.zero_one_samples {
                break;
            }
        }
        cascade.advance()?;
        k += 1;
    }
    Ok(out)
}

/// Boundedness, convergence certificate with `P = I`, 0-1 chaos test on the
/// driver and responder outputs, and stationarity over random initial
/// conditions. Every step runs; failures are collected, not short-circuited.
pub fn run_checks(cfg: &PipelineConfig) -> Result<CheckReport> {
    let c = &cfg.check;
    let s = &cfg.system;
    let mut steps = Vec::new();
    let mut warnings = Vec::new();

    let series = match chaos_series(cfg) {
        Ok(series) => Some(series),
        Err(Error::Divergence { time }) => {
            steps.push(CheckStep {
                name: "boundedness".into(),
                passed: false,
                value: f64::INFINITY,
                limit: c.state_bound,
                detail: format!("state diverged at t = {time}"),
            });
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(series) = &series {
        steps.push(CheckStep {
            name: "boundedness".into(),
            passed: series.sup_norm.is_finite() && series.sup_norm <= c.state_bound,
            value: series.sup_norm,
            limit: c.state_bound,
            detail: "largest |state| over the chaos-test run".into(),
        });
    }

    let n = s.responder.dim();
    let identity: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let certificate = convergence_certificate(&s.responder, &identity)?;
    steps.push(CheckStep {
        name: "certificate".into(),
        passed: certificate.valid,
        value: certificate.max_eigenvalue_of_q,
        limit: 0.0,
        detail: "largest eigenvalue of Q with P = I must be negative".into(),
    });

    if let Some(series) = &series {
        for (name, data) in [("chaos_driver", &series.driver), ("chaos_responder", &series.responder)] {
            let k = zero_one_chaos_test_with(data, &c.zero_one)?;
            steps.push(CheckStep {
                name: name.into(),
                passed: k >= c.zero_one_threshold,
                value: k,
                limit: c.zero_one_threshold,
                detail: format!("0-1 test statistic K over {} samples at spacing {}", data.len(), c.zero_one_delta),
            });
        }
    }

    let stationarity = match stationarity_check(&s.driver, &s.responder, &cfg.stationarity()) {
        Ok(st) => {
            if st.degenerate {
                warnings.push("non-chaotic output: stationarity runs are degenerate (every run collapsed to a point)".into());
            }
            steps.push(CheckStep {
                name: "stationarity".into(),
                passed: !st.degenerate && st.max_ks <= c.max_ks,
                value: st.max_ks,
                limit: c.max_ks,
                detail: format!("largest pairwise KS distance over {} initial conditions", st.initial_conditions.len()),
            });
            Some(st)
        }
        Err(Error::Divergence { time }) => {
            steps.push(CheckStep {
                name: "stationarity".into(),
                passed: false,
                value: f64::INFINITY,
                limit: c.max_ks,
                detail: format!("a run diverged at t = {time}"),
            });
            None
        }
        Err(e) => return Err(e),
    };

    let failed: Vec<String> = steps.iter().filter(|s| !s.passed).map(|s| s.name.clone()).collect();
    for f in &failed {
        log::warn!("check '{f}' failed");
    }
    Ok(CheckReport {
        passed: failed.is_empty(),
        failed,
        warnings,
        steps,
        certificate: Some(certificate),
        stationarity,
    })
}

// ------------------------------------------------------------- simulation

pub struct SyncRun {
    pub report: SyncReport,
    pub driver: Trajectory,
    pub responders: [Trajectory; 2],
}

/// Drives the two responders of `cfg.sync` from one driver trajectory.
pub fn simulate_sync(cfg: &PipelineConfig) -> Result<SyncRun> {
    let s = &cfg.system;
    let t_end = cfg.sync.t_end;
    let u = integrate(&s.driver, &s.driver_ic, None, s.dt, t_end)?;
    let [a, b] = &cfg.sync.responder_ics;
    let report = sync_report(&s.responder, &u, a, b, s.dt, t_end)?;
    let za = integrate(&s.responder, a, Some(&u), s.dt, t_end)?;
    let zb = integrate(&s.responder, b, Some(&u), s.dt, t_end)?;
    Ok(SyncRun { report, driver: u, responders: [za, zb] })
}

/// Responder output sampled every `density.delta` over
/// `[density.t_start, density.t_end]`, as an output-only trajectory.
pub fn output_series(cfg: &PipelineConfig) -> Result<Trajectory> {
    let s = &cfg.system;
    let d = &cfg.density;
    let ic = InitialCondition { driver: s.driver_ic.clone(), responder: d.responder_ic.clone() };
    let samples = sample_output(&s.driver, &s.responder, &ic, s.dt, d.t_end, d.delta, d.t_start)?;
    Trajectory::from_outputs(d.t_start, d.delta, samples)
}

pub fn write_sync_artifacts(dir: &Path, cfg: &PipelineConfig, run: &SyncRun) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let p = dir.join(artifacts::SYNC_REPORT);
    jsonio::write_file(&p, &run.report)?;
    written.push(p);
    let p = dir.join(artifacts::SYNC_ERROR);
    write_rows(&p, &["t", "error"], run.report.error_series.iter().enumerate().map(|(k, e)| vec![k as f64 * run.report.dt, *e]))?;
    written.push(p);
    let stride = cfg.sync.export_stride;
    let p = dir.join(artifacts::DRIVER);
    trajfile::write_csv(&run.driver.subsample(0, stride), BufWriter::new(File::create(&p)?))?;
    written.push(p);
    for (name, z) in artifacts::RESPONDERS.iter().zip(&run.responders) {
        let p = dir.join(name);
        trajfile::write_csv(&z.subsample(0, stride), BufWriter::new(File::create(&p)?))?;
        written.push(p);
    }
    Ok(written)
}

// ------------------------------------------------------------------ cells

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRun {
    pub partition: CellPartition,
    pub density: EmpiricalDistribution,
    pub delay: DelaySelection,
}

/// Density, decorrelating delay and cell boundaries from an output series
/// sampled at spacing `series.dt`.
pub fn cells_from_series(series: &Trajectory, target: &Pmf, bins: usize, threshold: f64, max_lag: usize) -> Result<CellRun> {
    let density = estimate_density(&series.outputs, bins)?;
    let max_lag = max_lag.min(series.len().saturating_sub(2)).max(1);
    let delay = select_delay(&series.outputs, series.dt, threshold, max_lag)?;
    let partition = build_cells(&density, target)?.with_sampling(delay.tau, series.dt);
    Ok(CellRun { partition, density, delay })
}

/// Session settings with the partition's sampling period applied.
pub fn session_for(cfg: &PipelineConfig, partition: &CellPartition) -> SessionConfig {
    let mut s = cfg.session();
    if let Some(d) = partition.delta {
        s.delta = d;
    }
    s
}

/// Streams `count` symbols from a fresh responder run, starting at
/// `density.t_start`.
pub fn live_stream(cfg: &PipelineConfig, partition: &CellPartition, count: usize) -> Result<RealizationStream> {
    let s = &cfg.system;
    let delta = partition.delta.unwrap_or(cfg.density.delta);
    let tau = partition.delay_tau.unwrap_or(1);
    let sched = SampleSchedule::new(s.dt, delta, tau, cfg.density.t_start)?;
    let mut cascade = Cascade::new(&s.driver, &s.driver_ic, s.dt)?.with_responder(&s.responder, &cfg.density.responder_ic)?;
    generate_stream_live(&mut cascade, 0, partition, sched, count)
}

// ---------------------------------------------------------------- channel

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transport {
    /// Both endpoints in this process, payloads handed over directly.
    InProcess,
    /// Station on a thread behind a loopback TCP socket.
    Loopback,
    /// Station already listening at this address.
    Connect(String),
}

pub fn run_channel(
    problem: &NoiseDesignProblem,
    partition: &CellPartition,
    session: &SessionConfig,
    transport: &Transport,
) -> Result<SessionOutcome> {
    match transport {
        Transport::InProcess => run_session(problem, partition, session),
        Transport::Loopback => run_session_loopback(problem, partition, session),
        Transport::Connect(addr) => connect_server(problem, partition, session, addr.as_str()),
    }
}

pub fn write_channel_artifacts(dir: &Path, outcome: &SessionOutcome) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let p = dir.join(artifacts::DISTORTION);
    jsonio::write_file(&p, &outcome.report)?;
    written.push(p);
    if let Some(log) = &outcome.log {
        let p = dir.join(artifacts::MESSAGE_LOG);
        std::fs::write(&p, log)?;
        written.push(p);
    }
    Ok(written)
}

// ---------------------------------------------------------------- figures

/// Everything the figure series are cut from.
pub struct FigureInputs<'a> {
    pub sync: &'a SyncRun,
    pub export_stride: usize,
    pub cells: &'a CellRun,
    pub stream: &'a RealizationStream,
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the plot series; column layouts are documented in `docs/figures.md`.
pub fn write_figures(dir: &Path, fig: &FigureInputs) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut out = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    let run = fig.sync;
    let stride = fig.export_stride.max(1);
    let [za, zb] = &run.responders;
    let mut header = vec!["t".to_string()];
    header.extend((0..run.driver.dim).map(|i| format!("driver_x{i}")));
    header.extend((0..za.dim).map(|i| format!("responder1_z{i}")));
    header.extend((0..zb.dim).map(|i| format!("responder2_z{i}")));
    header.extend(["driver_output", "responder1_output", "responder2_output"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        &out(artifacts::FIG_TRAJECTORIES),
        &header,
        (0..run.driver.len()).step_by(stride).map(|k| {
            let mut row = vec![run.driver.time(k)];
            row.extend_from_slice(run.driver.state(k));
            row.extend_from_slice(za.state(k));
            row.extend_from_slice(zb.state(k));
            row.extend([run.driver.outputs[k], za.outputs[k], zb.outputs[k]]);
            row
        }),
    )?;

    let dt = run.report.dt;
    write_rows(
        &out(artifacts::FIG_SYNC_ERROR),
        &["t", "error", "log10_error"],
        run.report.error_series.iter().enumerate().map(|(k, &e)| vec![k as f64 * dt, e, e.log10()]),
    )?;

    let d = &fig.cells.density;
    write_rows(
        &out(artifacts::FIG_DENSITY),
        &["bin_lo", "bin_hi", "mass", "density"],
        d.bin_edges.windows(2).zip(&d.bin_masses).zip(d.densities()).map(|((e, &m), f)| vec![e[0], e[1], m, f]),
    )?;
    write_rows(&out(artifacts::FIG_CDF), &["s", "cdf"], d.bin_edges.iter().map(|&s| vec![s, d.cdf(s)]))?;

    let part = &fig.cells.partition;
    let mut cumulative = 0.0;
    write_rows(
        &out(artifacts::FIG_CELLS),
        &["cell", "symbol", "target", "cumulative", "upper_boundary"],
        (0..part.len()).map(|i| {
            cumulative += part.target_pmf[i];
            let upper = part.boundaries.get(i).copied().unwrap_or(d.support[1]);
            vec![i as f64, part.symbols.point(i)[0], part.target_pmf[i], cumulative, upper]
        }),
    )?;

    let st = fig.stream;
    write_rows(
        &out(artifacts::FIG_STREAM),
        &["j", "t", "cell", "v"],
        (0..st.len()).map(|j| vec![j as f64, st.sample_times[j], st.indices[j] as f64, st.values[j]]),
    )?;
    let empirical = st.empirical_pmf(part)?;
    write_rows(
        &out(artifacts::FIG_PMF),
        &["v", "target", "empirical"],
        (0..part.len()).map(|i| vec![part.symbols.point(i)[0], part.target_pmf[i], empirical.probs()[i]]),
    )?;
    Ok(written)
}

// --------------------------------------------------------------- manifest

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    /// Keyed by path relative to the output directory.
    pub artifacts: BTreeMap<String, ArtifactEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn build_manifest(dir: &Path, cfg: &PipelineConfig, files: &[PathBuf]) -> Result<Manifest> {
    let mut artifacts = BTreeMap::new();
    for f in files {
        let bytes = std::fs::read(f)?;
        let key = f.strip_prefix(dir).unwrap_or(f).display().to_string();
        artifacts.insert(key, ArtifactEntry { sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
    }
    Ok(Manifest { config_sha256: sha256_hex(jsonio::to_string(cfg)?.as_bytes()), artifacts })
}

// --------------------------------------------------------------- pipeline

pub struct PipelineOutcome {
    pub solution: NoiseSolution,
    pub check: CheckReport,
    pub sync: SyncReport,
    pub cells: CellRun,
    pub session: SessionOutcome,
    pub manifest: Manifest,
}

/// solve → check → simulate → cells → channel → figures, writing every
/// artifact and a manifest into `out`. A failed check stops the run after
/// its report is written.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<PipelineOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let mut files = Vec::new();

    let loaded = load_problem(cfg)?;
    log::info!("problem from {}", loaded.source);
    files.push(write_json(out, artifacts::PROBLEM, &loaded.problem)?);
    if let Some(s) = &loaded.summary {
        files.push(write_json(out, artifacts::DATASET_SUMMARY, s)?);
    }
    let solution = solve_converged(&loaded.problem, &cfg.solver)?;
    files.push(write_json(out, artifacts::SOLUTION, &solution)?);

    let check = run_checks(cfg)?;
    files.push(write_json(out, artifacts::CHECK, &check)?);
    if !check.passed {
        let manifest = build_manifest(out, cfg, &files)?;
        jsonio::write_file(&out.join(artifacts::MANIFEST), &manifest)?;
        return Err(Error::CheckFailed(check.failed));
    }

    let sync = simulate_sync(cfg)?;
    files.extend(write_sync_artifacts(out, cfg, &sync)?);

    let series = output_series(cfg)?;
    let p = out.join(artifacts::OUTPUT_SERIES);
    trajfile::write_binary(&series, BufWriter::new(File::create(&p)?))?;
    files.push(p);
    let d = &cfg.density;
    let cells = cells_from_series(&series, &solution.p_v_star, d.bins, d.delay_threshold, d.max_lag)?;
    drop(series);
    files.push(write_json(out, artifacts::PARTITION, &cells.partition)?);
    files.push(write_json(out, artifacts::CELLS, &cells)?);

    let session = run_channel(&loaded.problem, &cells.partition, &session_for(cfg, &cells.partition), &Transport::InProcess)?;
    files.extend(write_channel_artifacts(out, &session)?);

    let stream = live_stream(cfg, &cells.partition, cfg.density.stream_symbols)?;
    files.extend(write_figures(
        out,
        &FigureInputs { sync: &sync, export_stride: cfg.sync.export_stride, cells: &cells, stream: &stream },
    )?);

    let manifest = build_manifest(out, cfg, &files)?;
    jsonio::write_file(&out.join(artifacts::MANIFEST), &manifest)?;
    Ok(PipelineOutcome { solution, check, sync: sync.report, cells, session, manifest })
}

/// Writes `value` as JSON to `dir/name` and returns the path.
pub fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let p = dir.join(name);
    jsonio::write_file(&p, value)?;
    Ok(p)
}

/// Flushes a byte buffer to `dir/name`.
pub fn write_bytes(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let p = dir.join(name);
    let mut f = File::create(&p)?;
    f.write_all(bytes)?;
    Ok(p)
}
