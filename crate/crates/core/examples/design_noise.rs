// Designs the leakage-minimizing noise for the census query and compares
// both logarithm bases.
//
// ```sh
// cargo run --example design_noise
// ```

use syncnoise::ingest::{synthetic_census_joint, REFERENCE_MUTUAL_INFORMATION};
use syncnoise::noiseopt::{solve, NoiseDesignProblem, SolverOptions};
use syncnoise::probmodel::LogBase;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for base in [LogBase::Two, LogBase::E] {
        let joint = synthetic_census_joint(0, REFERENCE_MUTUAL_INFORMATION, base)?;
        let problem = NoiseDesignProblem::from_joint(&joint.joint, base)?;
        let sol = solve(&problem, &SolverOptions::default())?;
        println!("base {}:", base.label());
        println!("  I[X;Y]       = {:.5}", problem.undistorted_information());
        println!("  I[X;Y+V*]    = {:.5}  ({:.1}x less)", sol.optimal_value, problem.undistorted_information() / sol.optimal_value);
        println!("  iterations   = {}, kkt residual {:.1e}", sol.iterations, sol.kkt_residual);
        let p: Vec<String> = sol.p_v_star.probs().iter().map(|p| format!("{p:.4}")).collect();
        println!("  p_V*         = [{}]", p.join(", "));
        assert!(sol.converged);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
