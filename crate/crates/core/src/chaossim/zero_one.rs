//! The 0-1 test for chaos, correlation variant.
//!
//! For each frequency `c` the series `φ` drives the translation variables
//! `p_n = Σ_{j≤n} φ_j cos(jc)`, `q_n = Σ_{j≤n} φ_j sin(jc)`. Their mean-square
//! displacement grows linearly in `n` for chaotic data and stays bounded for
//! regular data. `K_c` is the correlation between `n` and the (oscillation
//! corrected) displacement; the statistic is the median over random `c`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_SERIES_LEN: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroOneOptions {
    /// Number of random frequencies `c ∈ (π/5, 4π/5)`.
    pub frequencies: usize,
    pub seed: u64,
}

impl Default for ZeroOneOptions {
    fn default() -> Self {
        ZeroOneOptions { frequencies: 100, seed: 0x01 }
    }
}

/// Median `K` with default options.
pub fn zero_one_chaos_test(series: &[f64]) -> Result<f64> {
    zero_one_chaos_test_with(series, &ZeroOneOptions::default())
}

pub fn zero_one_chaos_test_with(series: &[f64], opts: &ZeroOneOptions) -> Result<f64> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort { needed: MIN_SERIES_LEN, got: n });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NanInput);
    }
    if opts.frequencies == 0 {
        return Err(Error::InvalidArgument("0-1 test needs at least one frequency".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let spread = series.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if spread <= 1e-12 * mean.abs().max(1.0) {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cs: Vec<f64> = (0..opts.frequencies).map(|_| rng.random_range(PI / 5.0..4.0 * PI / 5.0)).collect();
    let mut ks: Vec<f64> = cs.par_iter().map(|&c| k_for_frequency(series, mean, c)).collect();
    ks.sort_by(f64::total_cmp);
    let m = ks.len();
    let median = if m % 2 == 1 { ks[m / 2] } else { 0.5 * (ks[m / 2 - 1] + ks[m / 2]) };
    Ok(median.clamp(-1.0, 1.0))
}

fn k_for_frequency(phi: &[f64], mean: f64, c: f64) -> f64 {
    let n = phi.len();
    let n_cut = n / 10;
    let mut p = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n + 1);
    let (mut ps, mut qs) = (0.0, 0.0);
    p.push(0.0);
    q.push(0.0);
    for (j, &v) in phi.iter().enumerate() {
        let a = (j + 1) as f64 * c;
        ps += v * a.cos();
        qs += v * a.sin();
        p.push(ps);
        q.push(qs);
    }
    let one_minus_cos_c = 1.0 - c.cos();
    let d: Vec<f64> = (1..=n_cut)
        .map(|lag| {
            let len = n - lag;
            let mut msd = 0.0;
            for j in 1..=len {
                let dp = p[j + lag] - p[j];
                let dq = q[j + lag] - q[j];
                msd += dp * dp + dq * dq;
            }
            msd / len as f64 - mean * mean * (1.0 - (lag as f64 * c).cos()) / one_minus_cos_c
        })
        .collect();
    let lags: Vec<f64> = (1..=n_cut).map(|l| l as f64).collect();
    correlation(&lags, &d)
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
