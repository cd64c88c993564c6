// Draws noise symbols from a running responder and compares their
// empirical pmf with the target.

use syncnoise::config::PipelineConfig;
use syncnoise::pipeline::live_stream;
use syncnoise::prng::CellPartition;
use syncnoise::probmodel::{Alphabet, Pmf};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = PipelineConfig::default();
    let target = Pmf::new(
        Alphabet::integers(1, 9)?,
        vec![0.1664, 0.1522, 0.1518, 0.1355, 0.1033, 0.0832, 0.0690, 0.0591, 0.0795],
    )?;
    // boundaries and delay from a full-length run of the standard system
    let boundaries = vec![-4.1428, -2.0340, -0.2938, 1.2519, 2.4230, 3.5511, 4.6851, 5.8818];
    let partition = CellPartition::new(boundaries, &target)?.with_sampling(1282, 1e-3);
    let stream = live_stream(&cfg, &partition, 5000)?;
    let first: Vec<String> = stream.values.iter().take(20).map(|v| v.to_string()).collect();
    println!("first symbols: {}", first.join(" "));
    let empirical = stream.empirical_pmf(&partition)?;
    println!("total variation to target over {} symbols: {:.4}", stream.len(), empirical.total_variation(&target)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
