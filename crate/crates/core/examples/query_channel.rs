// A query session: the server releases `Z = Y + V`, the station subtracts
// its own copy of `V`. Runs in process with ideal and imperfect
// synchronization, then once over a loopback TCP socket.

use syncnoise::channel::{run_session, run_session_loopback, SessionConfig, SyncMode};
use syncnoise::ingest::{synthetic_census_joint, REFERENCE_MUTUAL_INFORMATION};
use syncnoise::noiseopt::{solve, NoiseDesignProblem, SolverOptions};
use syncnoise::prng::CellPartition;
use syncnoise::probmodel::LogBase;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let joint = synthetic_census_joint(0, REFERENCE_MUTUAL_INFORMATION, LogBase::Two)?;
    let problem = NoiseDesignProblem::from_joint(&joint.joint, LogBase::Two)?;
    let sol = solve(&problem, &SolverOptions::default())?;
    let boundaries = vec![-4.1428, -2.0340, -0.2938, 1.2519, 2.4230, 3.5511, 4.6851, 5.8818];
    let partition = CellPartition::new(boundaries, &sol.p_v_star)?.with_sampling(1282, 1e-3);

    for (mode, t_start) in [(SyncMode::Ideal, 50.0), (SyncMode::Desync, 0.0), (SyncMode::Desync, 50.0)] {
        let cfg = SessionConfig { n_queries: 1000, mode, t_start, ..Default::default() };
        let r = run_session(&problem, &partition, &cfg)?.report;
        println!(
            "{mode:?} from t = {t_start:>4}: recovery {:.4}, mse {:.4} (bound {:.4}, banded {}), {} frames / {} bytes",
            r.recovery_rate, r.empirical_mse, r.distortion_bound, r.banded, r.frames, r.bytes
        );
    }

    let cfg = SessionConfig { n_queries: 500, ..Default::default() };
    let tcp = run_session_loopback(&problem, &partition, &cfg)?;
    println!("loopback TCP: recovery {:.4} over {} queries", tcp.report.recovery_rate, tcp.recovered.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
