// The numerical checks a driver/responder pair must pass before its output
// can serve as a noise source: boundedness, convergence certificate, 0-1
// chaos test and stationarity. Horizons are shortened; `syncnoise check`
// runs them at full length.

use syncnoise::config::PipelineConfig;
use syncnoise::pipeline::run_checks;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = PipelineConfig::default();
    cfg.check.zero_one_samples = 5000;
    cfg.check.stationarity.ic_count = 4;
    cfg.check.stationarity.t_end = 500.0;
    cfg.check.max_ks = 0.1;
    let report = run_checks(&cfg)?;
    for s in &report.steps {
        println!("{:<16} {:<4} value {:>10.5}  limit {}", s.name, if s.passed { "ok" } else { "FAIL" }, s.value, s.limit);
    }
    let st = report.stationarity.as_ref().expect("stationarity ran");
    println!("pooled support [{:.3}, {:.3}]", st.pooled_support[0], st.pooled_support[1]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
