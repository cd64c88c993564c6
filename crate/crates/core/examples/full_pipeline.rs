// Every stage in one call, writing artifacts, figure series and a hash
// manifest. Horizons are shortened; `syncnoise pipeline` uses the full
// defaults.
//
// ```sh
// cargo run --example full_pipeline -- /tmp/syncnoise-out
// ```

use syncnoise::config::PipelineConfig;
use syncnoise::pipeline::run_pipeline;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let out = match std::env::args().nth(1) {
        Some(dir) => std::path::PathBuf::from(dir),
        None => std::env::temp_dir().join("syncnoise-example"),
    };
    let mut cfg = PipelineConfig::default();
    cfg.density.t_end = 300.0;
    cfg.density.stream_symbols = 500;
    cfg.check.zero_one_samples = 5000;
    cfg.check.stationarity.ic_count = 3;
    cfg.check.stationarity.t_end = 400.0;
    cfg.check.max_ks = 0.2;
    cfg.channel.n_queries = 500;
    let outcome = run_pipeline(&cfg, &out)?;
    println!("I[X;Y+V*] = {:.5} bits", outcome.solution.optimal_value);
    println!("tau = {}, boundaries {:?}", outcome.cells.delay.tau, outcome.cells.partition.boundaries);
    println!("recovery rate {}", outcome.session.report.recovery_rate);
    for (name, a) in &outcome.manifest.artifacts {
        println!("  {name:<24} {} bytes  {}", a.bytes, &a.sha256[..16]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
