//! Command line front end: one subcommand per pipeline stage plus
//! `pipeline`, which chains them.
//!
//! Exit status: 0 success, 1 validation error, 2 non-convergence or failed
//! check, 3 I/O error.

use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use syncnoise::chaossim::trajfile;
use syncnoise::config::PipelineConfig;
use syncnoise::error::{Error, Result};
use syncnoise::ingest::{self, AttributeEncoding};
use syncnoise::jsonio;
use syncnoise::noiseopt::NoiseSolution;
use syncnoise::pipeline::{self, artifacts, FigureInputs, Transport};
use syncnoise::prng::CellPartition;
use syncnoise::probmodel::LogBase;
use syncnoise::channel::{session::listen_station, SyncMode};

#[derive(Parser)]
#[command(name = "syncnoise", version, about = "Optimal additive noise from synchronized chaotic oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline configuration JSON; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Logarithm base for information quantities.
    #[arg(long, global = true, value_parser = parse_base)]
    base: Option<LogBase>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Design the noise pmf minimizing I[X; Y + V].
    SolveNoise {
        /// Problem or dataset-summary JSON; the configured source when absent.
        problem: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Boundedness, certificate, chaos and stationarity checks.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Synchronization run and the long output series used for cells.
    SimulateSync {
        /// Skip the long output series.
        #[arg(long)]
        no_series: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Cell boundaries from an output series and a solution.
    BuildCells {
        /// Trajectory file (CSV or binary); its output column is used.
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Query session between the server and the remote station.
    RunChannel {
        /// Problem or dataset-summary JSON; the configured source when absent.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long, required_unless_present = "listen")]
        partition: Option<PathBuf>,
        /// Station starts from the server's responder state.
        #[arg(long, conflicts_with = "desync")]
        ideal_sync: bool,
        /// Station starts from its own initial state.
        #[arg(long)]
        desync: bool,
        /// Act as the station, accepting one session on this address.
        #[arg(long, conflicts_with_all = ["connect", "loopback"])]
        listen: Option<String>,
        /// Act as the server against a station at this address.
        #[arg(long, conflicts_with = "loopback")]
        connect: Option<String>,
        /// Run the station on a thread behind a loopback socket.
        #[arg(long)]
        loopback: bool,
        /// Also write the binary message log.
        #[arg(long)]
        log: bool,
        /// Number of queries.
        #[arg(long)]
        queries: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Plot-ready CSV series for every figure.
    Report {
        /// Use this solution instead of solving.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// solve → check → simulate → cells → channel → report, with a manifest.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
    /// Summarize a census file into p_X, p_Y and the joint.
    Ingest {
        data: PathBuf,
        #[arg(long)]
        encoding: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the default configuration.
    DefaultConfig,
}

fn parse_base(s: &str) -> std::result::Result<LogBase, String> {
    match s {
        "2" => Ok(LogBase::Two),
        "e" => Ok(LogBase::E),
        _ => Err(format!("base must be 2 or e, got '{s}'")),
    }
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::from_path(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg = cfg.with_seed(seed);
        }
        if let Some(b) = self.base {
            cfg.base = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &PipelineConfig) -> Result<PathBuf> {
        let dir = self.out.clone().or_else(|| cfg.paths.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn problem_for(cfg: &PipelineConfig, explicit: Option<&Path>, base: Option<LogBase>) -> Result<syncnoise::noiseopt::NoiseDesignProblem> {
    match explicit {
        Some(p) => pipeline::read_problem(p, base),
        None => Ok(pipeline::load_problem(cfg)?.problem),
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::SolveNoise { problem, common } => {
            let cfg = common.config()?;
            let out = common.out_dir(&cfg)?;
            let problem = problem_for(&cfg, problem.as_deref(), common.base)?;
            let sol = syncnoise::noiseopt::solve(&problem, &cfg.solver)?;
            announce(&[pipeline::write_json(&out, artifacts::SOLUTION, &sol)?]);
            println!(
                "I[X;Y] = {:.6}, I[X;Y+V*] = {:.6} ({})",
                problem.undistorted_information(),
                sol.optimal_value,
                sol.base.label()
            );
            if !sol.converged {
                return Err(Error::NotConverged { iterations: sol.iterations, kkt_residual: sol.kkt_residual });
            }
        }
        Command::Check { common } => {
            let cfg = common.config()?;
            let out = common.out_dir(&cfg)?;
            let report = pipeline::run_checks(&cfg)?;
            announce(&[pipeline::write_json(&out, artifacts::CHECK, &report)?]);
            for s in &report.steps {
                println!("{:<16} {}  value {:.6} limit {}", s.name, if s.passed { "pass" } else { "FAIL" }, s.value, s.limit);
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            report.into_result()?;
        }
        Command::SimulateSync { no_series, common } => {
            let cfg = common.config()?;
            let out = common.out_dir(&cfg)?;
            let run = pipeline::simulate_sync(&cfg)?;
            let mut written = pipeline::write_sync_artifacts(&out, &cfg, &run)?;
            if !no_series {
                let series = pipeline::output_series(&cfg)?;
                let p = out.join(artifacts::OUTPUT_SERIES);
                trajfile::write_binary(&series, BufWriter::new(std::fs::File::create(&p)?))?;
                written.push(p);
            }
            announce(&written);
            println!("final error {:e}, fitted rate {:.4}", run.report.final_error, run.report.fitted_rate);
        }
        Command::BuildCells { trajectory, solution, common } => {
            let cfg = common.config()?;
            let out = common.out_dir(&cfg)?;
            let series = trajfile::read_path(&trajectory)?;
            let sol: NoiseSolution = jsonio::read_file(&solution)?;
            let d = &cfg.density;
            let cells = pipeline::cells_from_series(&series, &sol.p_v_star, d.bins, d.delay_threshold, d.max_lag)?;
            announce(&[
                pipeline::write_json(&out, artifacts::PARTITION, &cells.partition)?,
                pipeline::write_json(&out, artifacts::CELLS, &cells)?,
            ]);
            println!("boundaries {:?}, tau {}", cells.partition.boundaries, cells.delay.tau);
        }
        Command::RunChannel { problem, partition, ideal_sync, desync, listen, connect, loopback, log, queries, common } => {
            let cfg = common.config()?;
            let out = common.out_dir(&cfg)?;
            if let Some(addr) = listen {
                let recovered = listen_station(addr.as_str())?;
                announce(&[pipeline::write_json(&out, artifacts::RECOVERIES, &recovered)?]);
                return Ok(());
            }
            let partition: CellPartition = jsonio::read_file(partition.as_deref().expect("required by clap"))?;
            let problem = problem_for(&cfg, problem.as_deref(), common.base)?;
            let mut session = pipeline::session_for(&cfg, &partition);
            if ideal_sync {
                session.mode = SyncMode::Ideal;
            }
            if desync {
                session.mode = SyncMode::Desync;
            }
            if let Some(n) = queries {
                session.n_queries = n;
            }
            session.record_log |= log;
            let transport = match (connect, loopback) {
                (Some(addr), _) => Transport::Connect(addr),
                (None, true) => Transport::Loopback,
                (None, false) => Transport::InProcess,
            };
            let outcome = pipeline::run_channel(&problem, &partition, &session, &transport)?;
            announce(&pipeline::write_channel_artifacts(&out, &outcome)?);
            let r = &outcome.report;
            println!("recovery rate {}, empirical mse {}, bound {}", r.recovery_rate, r.empirical_mse, r.distortion_bound);
        }
        Command::Report { solution, common } => {
            let cfg = common.config()?;
            let out = common.out_dir(&cfg)?;
            let sol = match solution {
                Some(p) => jsonio::read_file::<NoiseSolution>(&p)?,
                None => pipeline::solve_converged(&pipeline::load_problem(&cfg)?.problem, &cfg.solver)?,
            };
            let sync = pipeline::simulate_sync(&cfg)?;
            let series = pipeline::output_series(&cfg)?;
            let d = &cfg.density;
            let cells = pipeline::cells_from_series(&series, &sol.p_v_star, d.bins, d.delay_threshold, d.max_lag)?;
            drop(series);
            let stream = pipeline::live_stream(&cfg, &cells.partition, d.stream_symbols)?;
            let fig = FigureInputs { sync: &sync, export_stride: cfg.sync.export_stride, cells: &cells, stream: &stream };
            announce(&pipeline::write_figures(&out, &fig)?);
        }
        Command::Pipeline { common } => {
            let cfg = common.config()?;
            let out = common.out_dir(&cfg)?;
            let outcome = pipeline::run_pipeline(&cfg, &out)?;
            println!("wrote {} artifacts to {}", outcome.manifest.artifacts.len() + 1, out.display());
            println!(
                "I[X;Y+V*] = {:.6} ({}), tau {}, recovery rate {}",
                outcome.solution.optimal_value,
                outcome.solution.base.label(),
                outcome.cells.delay.tau,
                outcome.session.report.recovery_rate
            );
        }
        Command::Ingest { data, encoding, common } => {
            let cfg = common.config()?;
            let out = common.out_dir(&cfg)?;
            let encoding = match encoding.or(cfg.paths.encoding.clone()) {
                Some(p) => AttributeEncoding::from_path(&p)?,
                None => AttributeEncoding::default(),
            };
            let summary = ingest::load_adult(&data, &encoding)?;
            let problem = ingest::problem_from_summary(&summary, cfg.base)?;
            announce(&[
                pipeline::write_json(&out, artifacts::DATASET_SUMMARY, &summary)?,
                pipeline::write_json(&out, artifacts::PROBLEM, &problem)?,
            ]);
            println!("{} rows, {} dropped", summary.row_count, summary.dropped_rows);
        }
        Command::DefaultConfig => {
            print!("{}", jsonio::to_string(&PipelineConfig::default())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
