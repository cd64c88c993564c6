//! Empirical distributions and correlation of sampled outputs.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample count below which density estimates are considered unreliable.
pub const MIN_DENSITY_SAMPLES: usize = 10_000;

/// Histogram density plus the sorted samples behind the empirical CDF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub bin_edges: Vec<f64>,
    pub bin_masses: Vec<f64>,
    pub support: [f64; 2],
    pub sample_count: usize,
    #[serde(skip)]
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    /// Probability density per bin (mass / width).
    pub fn densities(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .zip(&self.bin_masses)
            .map(|(e, m)| m / (e[1] - e[0]))
            .collect()
    }

    /// `F(x) = #{s ≤ x} / n`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Inverse CDF by linear interpolation between order statistics:
    /// `q(p) = s_(⌊h⌋) + (h − ⌊h⌋)(s_(⌊h⌋+1) − s_(⌊h⌋))`, `h = p (n − 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        let s = &self.sorted;
        let h = p.clamp(0.0, 1.0) * (s.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(s.len() - 1);
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    }
}

/// Equal-width histogram over `[min, max]` of the samples.
pub fn estimate_density(samples: &[f64], bin_count: usize) -> Result<EmpiricalDistribution> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cannot estimate a density from no samples".into()));
    }
    if bin_count == 0 {
        return Err(Error::InvalidArgument("bin count must be positive".into()));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::NanInput);
    }
    if samples.len() < MIN_DENSITY_SAMPLES {
        log::warn!("density estimated from only {} samples", samples.len());
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = samples.len() as f64;
    if hi == lo {
        return Ok(EmpiricalDistribution {
            bin_edges: vec![lo - 0.5, lo + 0.5],
            bin_masses: vec![1.0],
            support: [lo, hi],
            sample_count: samples.len(),
            sorted,
        });
    }
    let width = (hi - lo) / bin_count as f64;
    let mut counts = vec![0usize; bin_count];
    for &s in &sorted {
        let b = (((s - lo) / width) as usize).min(bin_count - 1);
        counts[b] += 1;
    }
    let mut bin_edges: Vec<f64> = (0..bin_count).map(|i| lo + i as f64 * width).collect();
    bin_edges.push(hi);
    Ok(EmpiricalDistribution {
        bin_edges,
        bin_masses: counts.into_iter().map(|c| c as f64 / n).collect(),
        support: [lo, hi],
        sample_count: samples.len(),
        sorted,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|` on sorted inputs.
pub fn ks_distance_sorted(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Sorts copies of the inputs and computes the KS statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    ks_distance_sorted(&a, &b)
}

/// Normalized autocovariance `ρ(ℓ) = C(ℓ) / C(0)` for `ℓ = 0..=max_lag`,
/// with the biased estimator `C(ℓ) = (1/n) Σ_k (s_k − s̄)(s_{k+ℓ} − s̄)`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: n });
    }
    let max_lag = max_lag.min(n - 1);
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|s| (s - mean).powi(2)).sum::<f64>();
    if !(var > 0.0) || var / (n as f64) < f64::EPSILON * mean.abs().max(1.0).powi(2) {
        return Err(Error::ZeroVariance);
    }
    // zero-padded FFT correlation
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&s| Complex::new(s - mean, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in &mut buf {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let c0 = buf[0].re;
    Ok((0..=max_lag).map(|l| if l == 0 { 1.0 } else { buf[l].re / c0 }).collect())
}

/// Smallest lag `ℓ ≥ 1` with `|ρ(ℓ)| ≤ threshold`.
pub fn first_lag_below(rho: &[f64], threshold: f64) -> Option<usize> {
    rho.iter().enumerate().skip(1).find(|(_, r)| r.abs() <= threshold).map(|(l, _)| l)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelaySelection {
    pub tau: usize,
    #[serde(deserialize_with = "crate::jsonio::f64_or_nan")]
    pub rho_at_tau: f64,
    pub threshold: f64,
    /// `τ · Δ` in time units.
    pub delay_time: f64,
}

/// Picks the delay `τ` whose lagged samples are correlated at most `threshold`.
pub fn select_delay(series: &[f64], delta: f64, threshold: f64, max_lag: usize) -> Result<DelaySelection> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must be in (0, 1], got {threshold}")));
    }
    if threshold >= 1.0 {
        // every correlation coefficient satisfies |ρ| ≤ 1
        return Ok(DelaySelection { tau: 1, rho_at_tau: f64::NAN, threshold, delay_time: delta });
    }
    let rho = autocorrelation(series, max_lag)?;
    match first_lag_below(&rho, threshold) {
        Some(tau) => Ok(DelaySelection { tau, rho_at_tau: rho[tau], threshold, delay_time: tau as f64 * delta }),
        None => {
            let (argmin, min_abs_rho) = rho
                .iter()
                .enumerate()
                .skip(1)
                .map(|(l, r)| (l, r.abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((0, 1.0));
            Err(Error::NoDecorrelatingLag { max_lag: rho.len() - 1, threshold, min_abs_rho, argmin, rho })
        }
    }
}
