//! Synchronization of two identical responders driven by one signal.

use serde::{Deserialize, Serialize};

use super::certificate::convergence_certificate;
use super::integrate::{Stepper, Trajectory};
use super::system::{AffineResponder, OscillatorSystem};
use crate::error::{Error, Result};

/// Errors at or below this are treated as numerically zero and excluded
/// from the exponential fit.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Default thresholds for first-passage times.
pub const DEFAULT_THRESHOLDS: [f64; 3] = [1e-3, 1e-6, 1e-9];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTime {
    pub epsilon: f64,
    /// First sample time with error ≤ `epsilon`, if reached.
    pub time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    pub dt: f64,
    /// `|s₁(t_k) − s₂(t_k)|` for `t_k = k·dt`.
    pub error_series: Vec<f64>,
    /// Least-squares slope of `ln |s₁ − s₂|` over the decaying segment.
    #[serde(deserialize_with = "crate::jsonio::f64_or_nan")]
    pub fitted_rate: f64,
    /// Time span of the fitted segment.
    pub fit_window: [f64; 2],
    pub threshold_times: Vec<ThresholdTime>,
    pub final_error: f64,
    pub certificate_valid: bool,
}

impl SyncReport {
    pub fn time_to(&self, epsilon: f64) -> Option<f64> {
        first_time_below(&self.error_series, self.dt, epsilon)
    }

    /// Largest error at or after time `t`.
    pub fn max_error_after(&self, t: f64) -> f64 {
        let k = ((t / self.dt).ceil() as usize).min(self.error_series.len());
        self.error_series[k..].iter().fold(0.0, |m: f64, &e| m.max(e))
    }
}

fn first_time_below(series: &[f64], dt: f64, eps: f64) -> Option<f64> {
    series.iter().position(|&e| e <= eps).map(|k| k as f64 * dt)
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Fits `ln e(t)` over the leading segment where the error stays above
/// [`ERROR_FLOOR`]. Returns `(slope, [t_first, t_last])`; NaN when fewer
/// than two points qualify.
pub fn fit_log_error(series: &[f64], dt: f64) -> (f64, [f64; 2]) {
    let end = series.iter().position(|&e| e <= ERROR_FLOOR).unwrap_or(series.len());
    if end < 2 {
        return (f64::NAN, [0.0, 0.0]);
    }
    let t: Vec<f64> = (0..end).map(|k| k as f64 * dt).collect();
    let y: Vec<f64> = series[..end].iter().map(|e| e.ln()).collect();
    (ls_slope(&t, &y), [0.0, t[end - 1]])
}

/// Drives two copies of `responder` from `z1_0` and `z2_0` with the
/// shared input `u` over `[0, t_end]`.
pub fn sync_report(
    responder: &AffineResponder,
    u: &Trajectory,
    z1_0: &[f64],
    z2_0: &[f64],
    dt: f64,
    t_end: f64,
) -> Result<SyncReport> {
    let n = responder.dim();
    for z in [z1_0, z2_0] {
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.len() });
        }
    }
    if (u.dt - dt).abs() > 1e-12 * dt {
        return Err(Error::InvalidArgument("input trajectory must share the integration grid".into()));
    }
    let steps = super::integrate::step_count(dt, t_end)?;
    if u.len() < steps {
        return Err(Error::TrajectoryTooShort { requested: steps, achievable: u.len() });
    }
    let identity: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let certificate_valid = convergence_certificate(responder, &identity).map(|c| c.valid).unwrap_or(false);
    if !certificate_valid {
        log::warn!("responder has no valid convergence certificate with P = I; synchronization is not guaranteed");
    }

    let mut a = Stepper::new(z1_0);
    let mut b = Stepper::new(z2_0);
    let mut errors = Vec::with_capacity(steps + 1);
    errors.push((responder.output(a.state()) - responder.output(b.state())).abs());
    for k in 0..steps {
        let uk = u.outputs[k];
        let t = k as f64 * dt;
        a.step(responder, uk, t, dt)?;
        b.step(responder, uk, t, dt)?;
        errors.push((responder.output(a.state()) - responder.output(b.state())).abs());
    }
    Ok(build_report(errors, dt, certificate_valid))
}

pub(crate) fn build_report(errors: Vec<f64>, dt: f64, certificate_valid: bool) -> SyncReport {
    let (fitted_rate, fit_window) = fit_log_error(&errors, dt);
    let threshold_times = DEFAULT_THRESHOLDS
        .iter()
        .map(|&epsilon| ThresholdTime { epsilon, time: first_time_below(&errors, dt, epsilon) })
        .collect();
    SyncReport {
        dt,
        fitted_rate,
        fit_window,
        threshold_times,
        final_error: errors.last().copied().unwrap_or(0.0),
        error_series: errors,
        certificate_valid,
    }
}
