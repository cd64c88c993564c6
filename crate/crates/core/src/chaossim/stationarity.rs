//! Monte-Carlo check that the responder output distribution does not
//! depend on initial conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrate::{step_count, stride_of, Cascade};
use super::stats::ks_distance_sorted;
use super::system::OscillatorSystem;
use crate::error::{Error, Result};

/// Support widths below this mean the output has collapsed to a point.
pub const DEGENERATE_WIDTH: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub driver: Vec<f64>,
    pub responder: Vec<f64>,
}

/// Box from which random initial conditions are drawn: driver states
/// uniform in `[−d, d]^n` (origin excluded), responder states in `[−r, r]^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcBox {
    pub driver_half_width: f64,
    pub responder_half_width: f64,
}

impl Default for IcBox {
    fn default() -> Self {
        IcBox { driver_half_width: 20.0, responder_half_width: 200.0 }
    }
}

impl IcBox {
    pub fn draw(&self, rng: &mut impl Rng, driver_dim: usize, responder_dim: usize) -> InitialCondition {
        let d = self.driver_half_width;
        let driver = loop {
            let x: Vec<f64> = (0..driver_dim).map(|_| rng.random_range(-d..=d)).collect();
            // the origin is an equilibrium of the Lorenz system
            if x.iter().any(|v| v.abs() > 1e-9) {
                break x;
            }
        };
        let r = self.responder_half_width;
        let responder = (0..responder_dim).map(|_| rng.random_range(-r..=r)).collect();
        InitialCondition { driver, responder }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityOptions {
    pub ic_count: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Sampling period of the responder output.
    pub delta: f64,
    /// Samples before this time are discarded.
    pub transient: f64,
    pub seed: u64,
    pub ic_box: IcBox,
    /// Explicit initial conditions; overrides random draws when set.
    pub initial_conditions: Option<Vec<InitialCondition>>,
}

impl Default for StationarityOptions {
    fn default() -> Self {
        StationarityOptions {
            ic_count: 20,
            dt: 1e-3,
            t_end: 10_000.0,
            delta: 1e-2,
            transient: 50.0,
            seed: 0,
            ic_box: IcBox::default(),
            initial_conditions: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub max_ks: f64,
    /// Symmetric matrix of pairwise KS distances.
    pub pairwise_ks: Vec<Vec<f64>>,
    pub supports: Vec<[f64; 2]>,
    pub pooled_support: [f64; 2],
    pub samples_per_run: usize,
    pub initial_conditions: Vec<InitialCondition>,
    pub ic_box: IcBox,
    pub seed: u64,
    /// Every run collapsed to (nearly) a single value.
    pub degenerate: bool,
}

/// Simulates `driver → responder` from `ic` and returns the responder
/// output sampled every `delta` for `t ≥ transient`, up to `t_end`.
pub fn sample_output(
    driver: &dyn OscillatorSystem,
    responder: &dyn OscillatorSystem,
    ic: &InitialCondition,
    dt: f64,
    t_end: f64,
    delta: f64,
    transient: f64,
) -> Result<Vec<f64>> {
    let steps = step_count(dt, t_end)?;
    let stride = stride_of(delta, dt)?;
    let first = step_count(dt, transient)?;
    let mut cascade = Cascade::new(driver, &ic.driver, dt)?.with_responder(responder, &ic.responder)?;
    let mut out = Vec::with_capacity(steps.saturating_sub(first) / stride + 1);
    for k in 0..=steps {
        if k >= first && (k - first) % stride == 0 {
            out.push(cascade.responder_output(0));
        }
        if k < steps {
            cascade.advance()?;
        }
    }
    Ok(out)
}

/// Runs `ic_count` independent simulations and reports the largest pairwise
/// Kolmogorov–Smirnov distance between their output distributions.
pub fn stationarity_check(
    driver: &dyn OscillatorSystem,
    responder: &dyn OscillatorSystem,
    opts: &StationarityOptions,
) -> Result<StationarityReport> {
    let ics = match &opts.initial_conditions {
        Some(ics) => ics.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..opts.ic_count).map(|_| opts.ic_box.draw(&mut rng, driver.dim(), responder.dim())).collect()
        }
    };
    if ics.len() < 2 {
        return Err(Error::InvalidArgument(format!("stationarity needs at least 2 initial conditions, got {}", ics.len())));
    }
    if opts.transient >= opts.t_end {
        return Err(Error::InvalidArgument("transient must end before t_end".into()));
    }

    let runs: Vec<Vec<f64>> = ics
        .par_iter()
        .map(|ic| {
            let mut s = sample_output(driver, responder, ic, opts.dt, opts.t_end, opts.delta, opts.transient)?;
            s.sort_unstable_by(f64::total_cmp);
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let m = runs.len();
    let mut pairwise = vec![vec![0.0; m]; m];
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let dists: Vec<f64> = pairs.par_iter().map(|&(i, j)| ks_distance_sorted(&runs[i], &runs[j])).collect();
    for (&(i, j), &d) in pairs.iter().zip(&dists) {
        pairwise[i][j] = d;
        pairwise[j][i] = d;
    }
    let max_ks = dists.iter().fold(0.0f64, |a, &b| a.max(b));
    let supports: Vec<[f64; 2]> = runs.iter().map(|s| [s[0], s[s.len() - 1]]).collect();
    let pooled_support = supports.iter().fold([f64::INFINITY, f64::NEG_INFINITY], |a, s| [a[0].min(s[0]), a[1].max(s[1])]);
    let degenerate = supports.iter().all(|s| s[1] - s[0] < DEGENERATE_WIDTH);
    if degenerate {
        log::warn!("non-chaotic output: every run collapsed to a support narrower than {DEGENERATE_WIDTH}");
    }
    Ok(StationarityReport {
        max_ks,
        pairwise_ks: pairwise,
        supports,
        pooled_support,
        samples_per_run: runs[0].len(),
        initial_conditions: ics,
        ic_box: opts.ic_box,
        seed: opts.seed,
        degenerate,
    })
}
