mod common;

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use syncnoise::chaossim::{trajfile, AffineResponder, Driver, InputTerm, Trajectory};
use syncnoise::channel::session::{DistortionReport, Recovery};
use syncnoise::config::PipelineConfig;
use syncnoise::jsonio;
use syncnoise::noiseopt::{random_problem, NoiseDesignProblem, NoiseSolution};
use syncnoise::pipeline::{artifacts, sha256_hex, CheckReport, Manifest};
use syncnoise::prng::CellPartition;
use syncnoise::probmodel::{Alphabet, JointPmf, LogBase, Pmf};

fn syncnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syncnoise")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, cfg: &PipelineConfig) -> PathBuf {
    let p = dir.join("config.json");
    jsonio::write_file(&p, cfg).unwrap();
    p
}

fn write_problem(dir: &Path, name: &str, problem: &NoiseDesignProblem) -> PathBuf {
    let p = dir.join(name);
    jsonio::write_file(&p, problem).unwrap();
    p
}

fn read<T: serde::de::DeserializeOwned>(p: &Path) -> T {
    jsonio::read_file(p).unwrap()
}

#[test]
fn independent_attributes_need_no_noise() {
    let dir = TempDir::new().unwrap();
    let (xa, ya) = (Alphabet::integers(0, 2).unwrap(), Alphabet::integers(1, 3).unwrap());
    let (px, py) = ([0.2, 0.3, 0.5], [0.6, 0.1, 0.3]);
    let joint = JointPmf::new(xa, ya, px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect()).unwrap();
    let problem = NoiseDesignProblem::from_joint(&joint, LogBase::Two).unwrap();
    let file = write_problem(dir.path(), "independent.json", &problem);
    let out = dir.path().join("o");
    let o = syncnoise(&["solve-noise", path(&file), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sol: NoiseSolution = read(&out.join(artifacts::SOLUTION));
    assert!(sol.optimal_value.abs() < 1e-12, "{}", sol.optimal_value);
}

#[test]
fn seeded_binary_problem_matches_grid() {
    let dir = TempDir::new().unwrap();
    let problem = random_problem(&mut ChaCha8Rng::seed_from_u64(11), 2, 2, LogBase::Two).unwrap();
    let file = write_problem(dir.path(), "p.json", &problem);
    let out = dir.path().join("o");
    let o = syncnoise(&["solve-noise", path(&file), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sol: NoiseSolution = read(&out.join(artifacts::SOLUTION));
    let oracle = common::grid_minimum(&problem, 1e-3);
    assert!((sol.optimal_value - oracle).abs() < 1e-4, "{} vs {oracle}", sol.optimal_value);
}

#[test]
fn base_flag_changes_units() {
    let dir = TempDir::new().unwrap();
    let problem = random_problem(&mut ChaCha8Rng::seed_from_u64(4), 3, 3, LogBase::Two).unwrap();
    let file = write_problem(dir.path(), "p.json", &problem);
    let (a, b) = (dir.path().join("bits"), dir.path().join("nats"));
    assert_eq!(code(&syncnoise(&["solve-noise", path(&file), "--out", path(&a)])), 0);
    assert_eq!(code(&syncnoise(&["solve-noise", path(&file), "--base", "e", "--out", path(&b)])), 0);
    let (bits, nats): (NoiseSolution, NoiseSolution) = (read(&a.join(artifacts::SOLUTION)), read(&b.join(artifacts::SOLUTION)));
    assert_eq!(nats.base, LogBase::E);
    assert!((nats.optimal_value - bits.optimal_value * std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn solution_json_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = syncnoise(&["solve-noise", "--seed", "3", "--out", path(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (x, y) = (std::fs::read(a.join(artifacts::SOLUTION)).unwrap(), std::fs::read(b.join(artifacts::SOLUTION)).unwrap());
    assert_eq!(x, y);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    let o = syncnoise(&["solve-noise", path(&missing), "--out", path(dir.path())]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("missing.json"));

    let o = syncnoise(&["solve-noise", "--base", "10"]);
    assert_eq!(code(&o), 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"p_x\": 3}").unwrap();
    let o = syncnoise(&["solve-noise", path(&bad), "--out", path(dir.path())]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));

    let mut cfg = common::quick_config();
    cfg.system.dt = -1.0;
    let c = write_config(dir.path(), &cfg);
    assert_eq!(code(&syncnoise(&["check", "--config", path(&c)])), 1);

    assert_eq!(code(&syncnoise(&["no-such-command"])), 1);
    assert_eq!(code(&syncnoise(&["--help"])), 0);
}

#[test]
fn default_config_round_trips() {
    let o = syncnoise(&["default-config"]);
    assert_eq!(code(&o), 0);
    let cfg: PipelineConfig = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cfg, PipelineConfig::default());
}

#[test]
fn check_passes_on_standard_system() {
    let dir = TempDir::new().unwrap();
    let c = write_config(dir.path(), &common::quick_config());
    let o = syncnoise(&["check", "--config", path(&c), "--out", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: CheckReport = read(&dir.path().join(artifacts::CHECK));
    assert!(r.passed);
}

#[test]
fn check_rejects_unstable_responder() {
    let dir = TempDir::new().unwrap();
    let mut cfg = common::quick_config();
    cfg.system.responder = AffineResponder::new(
        vec![vec![1.0, 0.0], vec![0.0, -2.5]],
        vec![InputTerm::Quadratic(-5.0), InputTerm::Sine(50.0)],
        1,
    )
    .unwrap();
    let c = write_config(dir.path(), &cfg);
    let o = syncnoise(&["check", "--config", path(&c), "--out", path(dir.path())]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let r: CheckReport = read(&dir.path().join(artifacts::CHECK));
    assert!(r.failed.iter().any(|f| f == "certificate"), "{:?}", r.failed);
}

#[test]
fn check_warns_on_constant_driver() {
    let dir = TempDir::new().unwrap();
    let mut cfg = common::quick_config();
    cfg.system.driver = Driver::Constant;
    cfg.system.driver_ic = vec![1.0];
    let c = write_config(dir.path(), &cfg);
    let o = syncnoise(&["check", "--config", path(&c), "--out", path(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
    assert!(stderr(&o).contains("non-chaotic output"), "{}", stderr(&o));
}

#[test]
fn simulate_sync_error_vanishes() {
    let dir = TempDir::new().unwrap();
    let c = write_config(dir.path(), &common::quick_config());
    let o = syncnoise(&["simulate-sync", "--no-series", "--config", path(&c), "--out", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join(artifacts::SYNC_ERROR)).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["t", "error"]);
    let rows: Vec<(f64, f64)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 20_001);
    assert!(rows[0].1 > 1.0);
    assert!(rows.iter().filter(|(t, _)| *t >= 19.0).all(|(_, e)| *e <= 1e-9));
    for name in [artifacts::DRIVER, artifacts::RESPONDERS[0], artifacts::RESPONDERS[1], artifacts::SYNC_REPORT] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    assert!(!dir.path().join(artifacts::OUTPUT_SERIES).exists());
}

fn binary_solution(p: [f64; 2]) -> NoiseSolution {
    NoiseSolution {
        p_v_star: Pmf::new(Alphabet::integers(0, 1).unwrap(), p.to_vec()).unwrap(),
        optimal_value: 0.0,
        base: LogBase::Two,
        iterations: 0,
        converged: true,
        kkt_residual: 0.0,
        objective_trace: Vec::new(),
    }
}

#[test]
fn build_cells_on_uniform_series() {
    let dir = TempDir::new().unwrap();
    let n = 100_001;
    let mut s: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    s.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let traj = dir.path().join("uniform.csv");
    trajfile::write_csv(&Trajectory::from_outputs(0.0, 1e-3, s).unwrap(), std::fs::File::create(&traj).unwrap()).unwrap();
    let sol = dir.path().join("sol.json");
    jsonio::write_file(&sol, &binary_solution([0.5, 0.5])).unwrap();
    let o = syncnoise(&["build-cells", "--trajectory", path(&traj), "--solution", path(&sol), "--out", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let part: CellPartition = read(&dir.path().join(artifacts::PARTITION));
    assert_eq!(part.boundaries, vec![0.5]);
    assert_eq!(part.delay_tau, Some(1));
}

/// Solution, series and cells for the quick configuration, built once per test.
fn channel_inputs(dir: &Path) -> (PathBuf, PathBuf) {
    let c = write_config(dir, &common::quick_config());
    for args in [
        vec!["solve-noise", "--config", path(&c), "--out", path(dir)],
        vec!["simulate-sync", "--config", path(&c), "--out", path(dir)],
    ] {
        let o = syncnoise(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (traj, sol) = (dir.join(artifacts::OUTPUT_SERIES), dir.join(artifacts::SOLUTION));
    let o = syncnoise(&["build-cells", "--config", path(&c), "--trajectory", path(&traj), "--solution", path(&sol), "--out", path(dir)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    (c, dir.join(artifacts::PARTITION))
}

#[test]
fn ideal_channel_recovers_every_query() {
    let dir = TempDir::new().unwrap();
    let (c, part) = channel_inputs(dir.path());
    let runs = [dir.path().join("r1"), dir.path().join("r2")];
    for out in &runs {
        let o = syncnoise(&["run-channel", "--config", path(&c), "--partition", path(&part), "--ideal-sync", "--log", "--out", path(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let r: DistortionReport = read(&runs[0].join(artifacts::DISTORTION));
    assert_eq!((r.recovery_rate, r.empirical_mse, r.n_queries), (1.0, 0.0, 300));
    let log = std::fs::read(runs[0].join(artifacts::MESSAGE_LOG)).unwrap();
    assert_eq!(syncnoise::channel::frame::decode_all(&log).unwrap().len(), r.frames);
    for name in [artifacts::DISTORTION, artifacts::MESSAGE_LOG] {
        assert_eq!(std::fs::read(runs[0].join(name)).unwrap(), std::fs::read(runs[1].join(name)).unwrap(), "{name}");
    }

    let o = syncnoise(&["run-channel", "--config", path(&c), "--partition", path(&part), "--loopback", "--out", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let looped: DistortionReport = read(&dir.path().join(artifacts::DISTORTION));
    assert_eq!(looped, r);
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

#[test]
fn station_and_server_in_separate_processes() {
    let dir = TempDir::new().unwrap();
    let (c, part) = channel_inputs(dir.path());
    let addr = format!("127.0.0.1:{}", free_port());
    let station_out = dir.path().join("station");
    let station = Command::new(env!("CARGO_BIN_EXE_syncnoise"))
        .args(["run-channel", "--listen", &addr, "--out", path(&station_out)])
        .spawn()
        .unwrap();
    let server_out = dir.path().join("server");
    let mut attempt = 0;
    let o = loop {
        let o = syncnoise(&[
            "run-channel", "--config", path(&c), "--partition", path(&part), "--desync", "--queries", "150", "--connect", &addr, "--out",
            path(&server_out),
        ]);
        // the station may not be listening yet
        if code(&o) == 3 && attempt < 50 {
            attempt += 1;
            std::thread::sleep(Duration::from_millis(100));
            continue;
        }
        break o;
    };
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(station.wait_with_output().unwrap().status.success());
    let r: DistortionReport = read(&server_out.join(artifacts::DISTORTION));
    let recovered: Vec<Recovery> = read(&station_out.join(artifacts::RECOVERIES));
    assert_eq!(recovered.len(), 150);
    let hits = recovered.len() as f64 * r.recovery_rate;
    assert!((hits - hits.round()).abs() < 1e-9);
    assert_eq!(r.n_queries, 150);
}

#[test]
fn pipeline_writes_manifest() {
    let dir = TempDir::new().unwrap();
    let c = write_config(dir.path(), &common::quick_config());
    let out = dir.path().join("run");
    let o = syncnoise(&["pipeline", "--config", path(&c), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: Manifest = read(&out.join(artifacts::MANIFEST));
    assert!(m.artifacts.len() >= 19, "{}", m.artifacts.len());
    for (name, entry) in &m.artifacts {
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(sha256_hex(&bytes), entry.sha256, "{name}");
    }
    assert_eq!(m.config_sha256, sha256_hex(jsonio::to_string(&common::quick_config()).unwrap().as_bytes()));
}

#[test]
fn pipeline_stops_on_failed_check() {
    let dir = TempDir::new().unwrap();
    let mut cfg = common::quick_config();
    cfg.check.zero_one_threshold = 1.1;
    let c = write_config(dir.path(), &cfg);
    let o = syncnoise(&["pipeline", "--config", path(&c), "--out", path(dir.path())]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(dir.path().join(artifacts::CHECK).exists());
    assert!(!dir.path().join(artifacts::PARTITION).exists());
}

#[test]
fn report_writes_figure_series() {
    let dir = TempDir::new().unwrap();
    let c = write_config(dir.path(), &common::quick_config());
    let o = syncnoise(&["report", "--config", path(&c), "--out", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join(artifacts::FIG_PMF)).unwrap();
    let rows: Vec<(f64, f64, f64)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    assert!((rows.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-9);
    assert!((rows.iter().map(|r| r.2).sum::<f64>() - 1.0).abs() < 1e-9);
    for name in [artifacts::FIG_TRAJECTORIES, artifacts::FIG_SYNC_ERROR, artifacts::FIG_DENSITY, artifacts::FIG_CDF, artifacts::FIG_CELLS, artifacts::FIG_STREAM] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn ingest_summarizes_census_rows() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("adult.data");
    let rows = [
        "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K",
        "50, Self-emp-not-inc, 83311, Bachelors, 13, Married-civ-spouse, Exec-managerial, Husband, White, Male, 0, 0, 13, United-States, <=50K",
        "38, Private, 215646, HS-grad, 9, Divorced, Handlers-cleaners, Not-in-family, Black, Female, 0, 0, 40, United-States, >50K",
        "53, Private, 234721, 11th, 7, Married-civ-spouse, Handlers-cleaners, Husband, Martian, Male, 0, 0, 40, United-States, <=50K",
    ];
    std::fs::write(&data, rows.join("\n")).unwrap();
    let o = syncnoise(&["ingest", path(&data), "--out", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: syncnoise::ingest::DatasetSummary = read(&dir.path().join(artifacts::DATASET_SUMMARY));
    assert_eq!((summary.row_count, summary.dropped_rows), (4, 1));
    assert!((summary.p_x.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // the written problem feeds straight back into solve-noise
    let o = syncnoise(&["solve-noise", path(&dir.path().join(artifacts::PROBLEM)), "--out", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}
