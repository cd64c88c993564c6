// Splits the responder output range into cells whose probabilities match
// a target pmf, and picks the sampling delay that decorrelates samples.

use syncnoise::config::PipelineConfig;
use syncnoise::pipeline::{cells_from_series, output_series};
use syncnoise::probmodel::{Alphabet, Pmf};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = PipelineConfig::default();
    // 500 time units instead of 4000: coarser boundaries, same procedure
    cfg.density.t_end = 550.0;
    let series = output_series(&cfg)?;
    let target = Pmf::new(
        Alphabet::integers(1, 9)?,
        vec![0.1664, 0.1522, 0.1518, 0.1355, 0.1033, 0.0832, 0.0690, 0.0591, 0.0795],
    )?;
    let d = &cfg.density;
    let run = cells_from_series(&series, &target, d.bins, d.delay_threshold, d.max_lag)?;
    println!("{} samples, support [{:.4}, {:.4}]", run.density.sample_count, run.density.support[0], run.density.support[1]);
    println!("delay tau = {} (rho = {:.4}, {} time units)", run.delay.tau, run.delay.rho_at_tau, run.delay.delay_time);
    let b: Vec<String> = run.partition.boundaries.iter().map(|b| format!("{b:.4}")).collect();
    println!("boundaries: {}", b.join(", "));
    let freq = run.partition.frequencies(&series.outputs)?;
    for (i, (f, t)) in freq.iter().zip(&run.partition.target_pmf).enumerate() {
        println!("  cell {}: frequency {f:.4}, target {t:.4}", i + 1);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
