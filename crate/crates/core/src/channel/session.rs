//! Server and station state machines and the query session that runs them.
//!
//! The server owns the driver and one responder; it streams the driving
//! signal to the station in `DRIVE` frames and answers each query with
//! `z = y + v`. The station runs its own responder on the received signal
//! and recovers `ŷ = z − v′`. Noise realizations are consumed in lockstep,
//! one per query, at the sample steps of a shared [`SampleSchedule`].

use std::collections::VecDeque;
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distortion::{distortion_bound, one_level_band, squared_distance, transition_matrix, TransitionMatrix};
use super::frame::{encode_into, meta_frame, parse_meta, read_frame, write_frame, DrivePayload, FrameType, QueryResponsePayload};
use crate::chaossim::{AffineResponder, Driver, OscillatorSystem, Stepper};
use crate::error::{Error, Result};
use crate::noiseopt::NoiseDesignProblem;
use crate::prng::{CellPartition, SampleSchedule};
use crate::probmodel::{mutual_information, Alphabet, JointPmf, LogBase, Pmf};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncMode {
    /// The station starts from the server's responder state, so both
    /// noise streams are identical.
    #[default]
    Ideal,
    /// The station starts from its own initial state and must synchronize.
    Desync,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub n_queries: usize,
    pub seed: u64,
    pub mode: SyncMode,
    pub dt: f64,
    pub delta: f64,
    /// Sampling delay in units of `delta`; taken from the partition when unset.
    pub tau: Option<usize>,
    /// First noise sample time.
    pub t_start: f64,
    pub driver: Driver,
    pub driver_ic: Vec<f64>,
    pub responder: AffineResponder,
    pub server_ic: Vec<f64>,
    pub station_ic: Vec<f64>,
    /// Driving-signal samples per `DRIVE` frame.
    pub drive_block: usize,
    pub record_log: bool,
    /// Asserted reachable `(y, ŷ)` index pairs; one-level band when unset.
    pub band: Option<Vec<(usize, usize)>>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            n_queries: 10_000,
            seed: 0,
            mode: SyncMode::Ideal,
            dt: 1e-3,
            delta: 1e-3,
            tau: None,
            t_start: 50.0,
            driver: Driver::default(),
            driver_ic: vec![1.0, 1.0, 1.0],
            responder: AffineResponder::standard(),
            server_ic: vec![150.0, 150.0],
            station_ic: vec![-150.0, -150.0],
            drive_block: 4096,
            record_log: false,
            band: None,
        }
    }
}

impl SessionConfig {
    pub fn schedule(&self, partition: &CellPartition) -> Result<SampleSchedule> {
        let tau = self.tau.or(partition.delay_tau).unwrap_or(1);
        SampleSchedule::new(self.dt, self.delta, tau, self.t_start)
    }

    fn station_start(&self) -> Vec<f64> {
        match self.mode {
            SyncMode::Ideal => self.server_ic.clone(),
            SyncMode::Desync => self.station_ic.clone(),
        }
    }
}

/// Everything the station learns from the opening `SESSION_META` frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationSetup {
    pub responder: AffineResponder,
    pub initial_state: Vec<f64>,
    pub dt: f64,
    pub schedule: SampleSchedule,
    pub partition: CellPartition,
    pub n_queries: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "message", rename_all = "snake_case")]
enum Meta {
    Setup(Box<StationSetup>),
    End,
    Recovered { recovered: Vec<Recovery> },
}

/// Server-side ground truth for one query (alphabet indices).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub x: usize,
    pub y: usize,
    pub v: usize,
    pub z: usize,
    /// Output sample that produced `v`.
    pub s: f64,
}

/// Station-side outcome for one query.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub query: u64,
    pub v: usize,
    pub y_hat: usize,
    /// `z − v′` was not a symbol and was projected to the nearest one.
    pub projected: bool,
    pub s: f64,
}

/// Responder plus the bookkeeping that turns its output into noise symbols.
struct NoiseTap {
    responder: AffineResponder,
    state: Stepper,
    step: u64,
    dt: f64,
    schedule: SampleSchedule,
    next_sample: u64,
    ready: VecDeque<(u64, usize, f64)>,
}

impl NoiseTap {
    fn new(responder: AffineResponder, x0: &[f64], dt: f64, schedule: SampleSchedule, partition: &CellPartition) -> Result<Self> {
        if x0.len() != responder.dim() {
            return Err(Error::DimensionMismatch { expected: responder.dim(), got: x0.len() });
        }
        let mut tap =
            NoiseTap { state: Stepper::new(x0), responder, step: 0, dt, schedule, next_sample: 0, ready: VecDeque::new() };
        tap.collect(partition)?;
        Ok(tap)
    }

    fn collect(&mut self, partition: &CellPartition) -> Result<()> {
        if self.step == self.schedule.step(self.next_sample) {
            let s = self.responder.output(self.state.state());
            self.ready.push_back((self.next_sample, partition.cell_of(s)?, s));
            self.next_sample += 1;
        }
        Ok(())
    }

    fn feed(&mut self, u: f64, partition: &CellPartition) -> Result<()> {
        self.state.step(&self.responder, u, self.step as f64 * self.dt, self.dt)?;
        self.step += 1;
        self.collect(partition)
    }
}

/// The trusted endpoint holding the private data.
pub struct Server<'a> {
    problem: &'a NoiseDesignProblem,
    partition: &'a CellPartition,
    driver: Driver,
    driver_state: Stepper,
    tap: NoiseTap,
    rng: ChaCha8Rng,
    x_dist: WeightedIndex<f64>,
    y_dists: Vec<Option<WeightedIndex<f64>>>,
    n_queries: usize,
    truth: Vec<QueryRecord>,
}

impl<'a> Server<'a> {
    pub fn new(problem: &'a NoiseDesignProblem, partition: &'a CellPartition, cfg: &SessionConfig) -> Result<Self> {
        if partition.symbols != *problem.y_alphabet() {
            return Err(Error::AlphabetMismatch("partition symbols differ from the query alphabet".into()));
        }
        if cfg.driver_ic.len() != cfg.driver.dim() {
            return Err(Error::DimensionMismatch { expected: cfg.driver.dim(), got: cfg.driver_ic.len() });
        }
        let schedule = cfg.schedule(partition)?;
        let x_dist = WeightedIndex::new(problem.p_x().probs())
            .map_err(|e| Error::InvalidDistribution(format!("p_X: {e}")))?;
        let y_dists = (0..problem.x_alphabet().len())
            .map(|i| WeightedIndex::new(problem.p_y_given_x().row(i)).ok())
            .collect();
        Ok(Server {
            problem,
            partition,
            driver: cfg.driver,
            driver_state: Stepper::new(&cfg.driver_ic),
            tap: NoiseTap::new(cfg.responder.clone(), &cfg.server_ic, cfg.dt, schedule, partition)?,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            x_dist,
            y_dists,
            n_queries: cfg.n_queries,
            truth: Vec::with_capacity(cfg.n_queries),
        })
    }

    pub fn finished(&self) -> bool {
        self.truth.len() >= self.n_queries
    }

    pub fn truth(&self) -> &[QueryRecord] {
        &self.truth
    }

    /// Advances the driver `n` steps, feeding its own responder, and
    /// returns the driving samples for the station.
    pub fn drive_block(&mut self, n: usize) -> Result<DrivePayload> {
        let start = self.tap.step;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let u = self.driver.output(self.driver_state.state());
            let t = self.tap.step as f64 * self.tap.dt;
            values.push(u);
            self.tap.feed(u, self.partition)?;
            self.driver_state.step(&self.driver, 0.0, t, self.tap.dt)?;
        }
        Ok(DrivePayload { start, values })
    }

    /// Answers one query per noise realization available so far.
    pub fn answer_ready(&mut self) -> Vec<QueryResponsePayload> {
        let mut out = Vec::new();
        while !self.finished() {
            let Some((j, v, s)) = self.tap.ready.pop_front() else { break };
            let x = self.x_dist.sample(&mut self.rng);
            let y = self.y_dists[x].as_ref().expect("x drawn with positive mass").sample(&mut self.rng);
            let z = self.problem.sum_index(y, v);
            self.truth.push(QueryRecord { x, y, v, z, s });
            out.push(QueryResponsePayload { query: j, z: self.problem.z_alphabet().point(z).to_vec() });
        }
        out
    }
}

/// The remote endpoint recovering queries.
pub struct Station {
    partition: CellPartition,
    tap: NoiseTap,
    recovered: Vec<Recovery>,
}

impl Station {
    pub fn new(setup: StationSetup) -> Result<Self> {
        let tap = NoiseTap::new(setup.responder, &setup.initial_state, setup.dt, setup.schedule, &setup.partition)?;
        Ok(Station { partition: setup.partition, tap, recovered: Vec::with_capacity(setup.n_queries) })
    }

    pub fn on_drive(&mut self, d: &DrivePayload) -> Result<()> {
        if d.start != self.tap.step {
            return Err(Error::MalformedPayload {
                kind: "DRIVE",
                reason: format!("block starts at step {} but the station is at step {}", d.start, self.tap.step),
            });
        }
        for &u in &d.values {
            self.tap.feed(u, &self.partition)?;
        }
        Ok(())
    }

    pub fn on_query(&mut self, q: &QueryResponsePayload) -> Result<Recovery> {
        let (j, v, s) = self.tap.ready.pop_front().ok_or_else(|| Error::MalformedPayload {
            kind: "QUERY_RESPONSE",
            reason: format!("query {} arrived before its noise sample", q.query),
        })?;
        if j != q.query {
            return Err(Error::MalformedPayload {
                kind: "QUERY_RESPONSE",
                reason: format!("expected query {j}, got {}", q.query),
            });
        }
        let noise = self.partition.symbols.point(v);
        if q.z.len() != noise.len() {
            return Err(Error::DimensionMismatch { expected: noise.len(), got: q.z.len() });
        }
        let diff: Vec<f64> = q.z.iter().zip(noise).map(|(z, v)| z - v).collect();
        let (y_hat, projected) = match self.partition.symbols.index_of(&diff) {
            Some(i) => (i, false),
            None => (self.partition.symbols.nearest(&diff), true),
        };
        let r = Recovery { query: j, v, y_hat, projected, s };
        self.recovered.push(r);
        Ok(r)
    }

    pub fn recovered(&self) -> &[Recovery] {
        &self.recovered
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub mode: SyncMode,
    pub n_queries: usize,
    pub seed: u64,
    pub base: LogBase,
    pub recovery_rate: f64,
    pub empirical_mse: f64,
    /// `d̄_δ` over the asserted band.
    pub distortion_bound: f64,
    /// Every observed `(y, ŷ)` lies in the asserted band.
    pub banded: bool,
    pub transition: TransitionMatrix,
    pub band_violations: usize,
    pub out_of_alphabet: usize,
    /// Queries where the two endpoints drew different noise symbols.
    pub noise_mismatches: usize,
    /// Empirical pmf of the server's noise symbols.
    pub noise_pmf: Vec<f64>,
    pub noise_total_variation: f64,
    /// Plug-in `I[X; Z]` from the `(x, z)` sample.
    pub mutual_information_estimate: f64,
    pub frames: usize,
    pub bytes: u64,
}

pub struct SessionOutcome {
    pub report: DistortionReport,
    pub truth: Vec<QueryRecord>,
    pub recovered: Vec<Recovery>,
    /// Concatenated frames sent by the server, when requested.
    pub log: Option<Vec<u8>>,
}

fn setup_for(cfg: &SessionConfig, partition: &CellPartition) -> Result<StationSetup> {
    Ok(StationSetup {
        responder: cfg.responder.clone(),
        initial_state: cfg.station_start(),
        dt: cfg.dt,
        schedule: cfg.schedule(partition)?,
        partition: partition.clone(),
        n_queries: cfg.n_queries,
    })
}

/// Counts frames and bytes and optionally keeps them.
struct FrameLog {
    frames: usize,
    bytes: u64,
    buf: Option<Vec<u8>>,
}

impl FrameLog {
    fn record(&mut self, f: &super::frame::Frame) -> Result<()> {
        self.frames += 1;
        self.bytes += f.encoded_len() as u64;
        if let Some(buf) = &mut self.buf {
            encode_into(f, buf)?;
        }
        Ok(())
    }
}

/// Runs both endpoints on one thread. Payloads are handed over directly;
/// the frames that would cross the link are counted and, if configured,
/// logged byte for byte.
pub fn run_session(problem: &NoiseDesignProblem, partition: &CellPartition, cfg: &SessionConfig) -> Result<SessionOutcome> {
    let mut server = Server::new(problem, partition, cfg)?;
    let setup = setup_for(cfg, partition)?;
    let mut log = FrameLog { frames: 0, bytes: 0, buf: cfg.record_log.then(Vec::new) };
    log.record(&meta_frame(&Meta::Setup(Box::new(setup.clone())))?)?;
    let mut station = Station::new(setup)?;
    let block = cfg.drive_block.max(1);
    while !server.finished() {
        let d = server.drive_block(block)?;
        log.record(&d.to_frame())?;
        station.on_drive(&d)?;
        for q in server.answer_ready() {
            log.record(&q.to_frame())?;
            station.on_query(&q)?;
        }
    }
    log.record(&meta_frame(&Meta::End)?)?;
    let report = build_report(problem, partition, cfg, server.truth(), station.recovered(), log.frames, log.bytes)?;
    Ok(SessionOutcome { report, truth: server.truth, recovered: station.recovered, log: log.buf })
}

/// Serves one session as the station over `stream`: reads the setup,
/// driving signal and responses, then replies with its recoveries.
pub fn serve_station<S: Read + Write>(stream: S) -> Result<Vec<Recovery>> {
    let mut reader = BufReader::new(stream);
    let first = read_frame(&mut reader)?.ok_or_else(|| Error::MalformedPayload {
        kind: "SESSION_META",
        reason: "connection closed before setup".into(),
    })?;
    let Meta::Setup(setup) = parse_meta(&first)? else {
        return Err(Error::MalformedPayload { kind: "SESSION_META", reason: "first frame must be the setup".into() });
    };
    let mut station = Station::new(*setup)?;
    loop {
        let f = read_frame(&mut reader)?.ok_or_else(|| Error::MalformedPayload {
            kind: "SESSION_META",
            reason: "connection closed before the end marker".into(),
        })?;
        match f.kind {
            FrameType::Drive => station.on_drive(&DrivePayload::from_frame(&f)?)?,
            FrameType::QueryResponse => {
                station.on_query(&QueryResponsePayload::from_frame(&f)?)?;
            }
            FrameType::SessionMeta => match parse_meta(&f)? {
                Meta::End => break,
                _ => return Err(Error::MalformedPayload { kind: "SESSION_META", reason: "unexpected message".into() }),
            },
        }
    }
    let mut stream = reader.into_inner();
    write_frame(&mut stream, &meta_frame(&Meta::Recovered { recovered: station.recovered.clone() })?)?;
    stream.flush()?;
    Ok(station.recovered)
}

/// Runs the server side against a station reachable through `stream`.
pub fn run_server<S: Read + Write>(
    problem: &NoiseDesignProblem,
    partition: &CellPartition,
    cfg: &SessionConfig,
    stream: S,
) -> Result<SessionOutcome> {
    let mut server = Server::new(problem, partition, cfg)?;
    let mut log = FrameLog { frames: 0, bytes: 0, buf: cfg.record_log.then(Vec::new) };
    let mut w = BufWriter::new(stream);
    let mut send = |w: &mut BufWriter<S>, f: super::frame::Frame| -> Result<()> {
        log.record(&f)?;
        write_frame(w, &f)
    };
    send(&mut w, meta_frame(&Meta::Setup(Box::new(setup_for(cfg, partition)?)))?)?;
    let block = cfg.drive_block.max(1);
    while !server.finished() {
        let d = server.drive_block(block)?;
        send(&mut w, d.to_frame())?;
        for q in server.answer_ready() {
            send(&mut w, q.to_frame())?;
        }
    }
    send(&mut w, meta_frame(&Meta::End)?)?;
    w.flush()?;
    let mut stream = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let reply = read_frame(&mut stream)?.ok_or_else(|| Error::MalformedPayload {
        kind: "SESSION_META",
        reason: "station closed without reporting".into(),
    })?;
    let Meta::Recovered { recovered } = parse_meta(&reply)? else {
        return Err(Error::MalformedPayload { kind: "SESSION_META", reason: "expected the station's recoveries".into() });
    };
    let report = build_report(problem, partition, cfg, server.truth(), &recovered, log.frames, log.bytes)?;
    Ok(SessionOutcome { report, truth: server.truth, recovered, log: log.buf })
}

/// Accepts one connection on `addr` and serves it as the station.
pub fn listen_station(addr: impl ToSocketAddrs) -> Result<Vec<Recovery>> {
    let listener = TcpListener::bind(addr)?;
    log::info!("station listening on {}", listener.local_addr()?);
    let (stream, peer) = listener.accept()?;
    log::info!("station accepted {peer}");
    serve_station(stream)
}

pub fn connect_server(
    problem: &NoiseDesignProblem,
    partition: &CellPartition,
    cfg: &SessionConfig,
    addr: impl ToSocketAddrs,
) -> Result<SessionOutcome> {
    run_server(problem, partition, cfg, TcpStream::connect(addr)?)
}

/// Runs a session over a loopback TCP socket with the station on a second
/// thread.
pub fn run_session_loopback(problem: &NoiseDesignProblem, partition: &CellPartition, cfg: &SessionConfig) -> Result<SessionOutcome> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let station = std::thread::spawn(move || -> Result<Vec<Recovery>> {
        let (stream, _) = listener.accept()?;
        serve_station(stream)
    });
    let outcome = connect_server(problem, partition, cfg, addr);
    let station_result = station.join().map_err(|_| Error::InvalidArgument("station thread panicked".into()))?;
    station_result?;
    outcome
}

fn build_report(
    problem: &NoiseDesignProblem,
    partition: &CellPartition,
    cfg: &SessionConfig,
    truth: &[QueryRecord],
    recovered: &[Recovery],
    frames: usize,
    bytes: u64,
) -> Result<DistortionReport> {
    if truth.len() != recovered.len() {
        return Err(Error::InvalidArgument(format!("{} queries sent but {} recovered", truth.len(), recovered.len())));
    }
    let y_alpha: &Alphabet = problem.y_alphabet();
    let m = y_alpha.len();
    let n = truth.len();
    let band = cfg.band.clone().unwrap_or_else(|| one_level_band(m));
    let pairs: Vec<(usize, usize)> = truth.iter().zip(recovered).map(|(t, r)| (t.y, r.y_hat)).collect();
    let transition = transition_matrix(m, &pairs, &band)?;
    let exact = pairs.iter().filter(|(y, yh)| y == yh).count();
    let mse = pairs.iter().map(|&(y, yh)| squared_distance(y_alpha.point(y), y_alpha.point(yh))).sum::<f64>() / n.max(1) as f64;

    let mut noise_counts = vec![0.0; m];
    for t in truth {
        noise_counts[t.v] += 1.0;
    }
    let (noise_pmf, noise_tv, mi) = if n > 0 {
        let noise = Pmf::from_weights(y_alpha.clone(), noise_counts)?;
        let tv = noise.total_variation(&partition.target()?)?;
        let joint = JointPmf::from_counts(problem.x_alphabet().clone(), problem.z_alphabet().clone(), truth.iter().map(|t| (t.x, t.z)))?;
        (noise.probs().to_vec(), tv, mutual_information(&joint, problem.base()))
    } else {
        (vec![0.0; m], f64::NAN, f64::NAN)
    };
    Ok(DistortionReport {
        mode: cfg.mode,
        n_queries: n,
        seed: cfg.seed,
        base: problem.base(),
        recovery_rate: if n > 0 { exact as f64 / n as f64 } else { f64::NAN },
        empirical_mse: mse,
        distortion_bound: distortion_bound(problem.p_y(), &band)?,
        banded: transition.respects_band(),
        band_violations: transition.band_violations,
        transition,
        out_of_alphabet: recovered.iter().filter(|r| r.projected).count(),
        noise_mismatches: truth.iter().zip(recovered).filter(|(t, r)| t.v != r.v).count(),
        noise_pmf,
        noise_total_variation: noise_tv,
        mutual_information_estimate: mi,
        frames,
        bytes,
    })
}
