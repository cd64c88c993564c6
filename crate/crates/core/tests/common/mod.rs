//! Helpers shared by the integration tests.
#![allow(dead_code)]

use syncnoise::config::PipelineConfig;
use syncnoise::noiseopt::NoiseDesignProblem;

/// Small enough to run every stage in a few seconds.
pub fn quick_config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.density.t_end = 250.0;
    c.density.max_lag = 5000;
    c.density.stream_symbols = 200;
    c.check.zero_one_samples = 5000;
    c.check.stationarity.ic_count = 3;
    c.check.stationarity.t_end = 400.0;
    // three short runs: looser than the full-scale 0.02
    c.check.max_ks = 0.2;
    c.channel.n_queries = 300;
    c
}

/// `I[X; Y+V]` in bits for integer alphabets `0..n`, computed directly.
pub fn information(px: &[f64], rows: &[Vec<f64>], pv: &[f64]) -> f64 {
    let nz = rows[0].len() + pv.len() - 1;
    let cond: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut z = vec![0.0; nz];
            for (y, &a) in r.iter().enumerate() {
                for (v, &b) in pv.iter().enumerate() {
                    z[y + v] += a * b;
                }
            }
            z
        })
        .collect();
    let pz: Vec<f64> = (0..nz).map(|k| px.iter().zip(&cond).map(|(p, c)| p * c[k]).sum()).collect();
    let mut total = 0.0;
    for (p, c) in px.iter().zip(&cond) {
        for k in 0..nz {
            if c[k] > 0.0 {
                total += p * c[k] * (c[k] / pz[k]).log2();
            }
        }
    }
    total
}

/// Minimum of [`information`] over `p_V = (p, 1−p)` on a grid of `step`.
pub fn grid_minimum(problem: &NoiseDesignProblem, step: f64) -> f64 {
    let px = problem.p_x().probs();
    let rows: Vec<Vec<f64>> = (0..px.len()).map(|i| problem.p_y_given_x().row(i).to_vec()).collect();
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|k| information(px, &rows, &[k as f64 / n as f64, 1.0 - k as f64 / n as f64])).fold(f64::INFINITY, f64::min)
}
