//! Fixed-step RK4 integration.
//!
//! Responder inputs are held constant over each step (zero-order hold) at
//! the driver output sampled at the start of the step. [`integrate`] and
//! [`Cascade`] perform the same floating-point operations in the same
//! order, so streamed and batch runs agree bit for bit.

use serde::{Deserialize, Serialize};

use super::system::OscillatorSystem;
use crate::error::{Error, Result};

/// Integrator state for one system: current state plus RK4 scratch space.
#[derive(Clone, Debug)]
pub struct Stepper {
    state: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Stepper {
    pub fn new(x0: &[f64]) -> Self {
        let n = x0.len();
        Stepper {
            state: x0.to_vec(),
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    /// One classical RK4 step with the input held at `u`.
    pub fn step(&mut self, sys: &dyn OscillatorSystem, u: f64, t: f64, dt: f64) -> Result<()> {
        let h2 = 0.5 * dt;
        sys.rhs(&self.state, u, t, &mut self.k1);
        for i in 0..self.state.len() {
            self.tmp[i] = self.state[i] + h2 * self.k1[i];
        }
        sys.rhs(&self.tmp, u, t + h2, &mut self.k2);
        for i in 0..self.state.len() {
            self.tmp[i] = self.state[i] + h2 * self.k2[i];
        }
        sys.rhs(&self.tmp, u, t + h2, &mut self.k3);
        for i in 0..self.state.len() {
            self.tmp[i] = self.state[i] + dt * self.k3[i];
        }
        sys.rhs(&self.tmp, u, t + dt, &mut self.k4);
        let mut finite = true;
        for i in 0..self.state.len() {
            self.state[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
            finite &= self.state[i].is_finite();
        }
        if finite {
            Ok(())
        } else {
            Err(Error::Divergence { time: t + dt })
        }
    }
}

/// States and outputs sampled on a uniform grid `t0 + k·dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub dim: usize,
    /// Row-major, `len × dim`.
    pub states: Vec<f64>,
    pub outputs: Vec<f64>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, dim: usize, states: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        if dim == 0 || states.len() != outputs.len() * dim {
            return Err(Error::TrajectoryFormat(format!(
                "{} state values do not match {} outputs of dimension {dim}",
                states.len(),
                outputs.len()
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("trajectory dt must be positive".into()));
        }
        Ok(Trajectory { t0, dt, dim, states, outputs })
    }

    /// Scalar series without state (dimension one, state = output).
    pub fn from_outputs(t0: f64, dt: f64, outputs: Vec<f64>) -> Result<Self> {
        Trajectory::new(t0, dt, 1, outputs.clone(), outputs)
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// Largest absolute state coordinate over the whole run.
    pub fn sup_norm(&self) -> f64 {
        self.states.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Every `stride`-th sample starting at index `start`.
    pub fn subsample(&self, start: usize, stride: usize) -> Trajectory {
        let idx: Vec<usize> = (start..self.len()).step_by(stride.max(1)).collect();
        let states = idx.iter().flat_map(|&k| self.state(k).to_vec()).collect();
        let outputs = idx.iter().map(|&k| self.outputs[k]).collect();
        Trajectory { t0: self.time(start), dt: self.dt * stride as f64, dim: self.dim, states, outputs }
    }
}

/// Number of `dt` steps covering `[0, t_end]`.
pub fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be non-negative, got {t_end}")));
    }
    Ok((t_end / dt).round() as usize)
}

/// Integer ratio `coarse / fine`, rejecting non-multiples.
pub fn stride_of(coarse: f64, fine: f64) -> Result<usize> {
    let r = coarse / fine;
    let k = r.round();
    if k < 1.0 || (r - k).abs() > 1e-9 * k {
        return Err(Error::InvalidArgument(format!("sampling period {coarse} is not a multiple of dt = {fine}")));
    }
    Ok(k as usize)
}

/// Integrates `system` from `x0` over `[0, t_end]` with RK4 step `dt`.
///
/// Driven systems need `input` on the same grid; `input.outputs[k]` is held
/// over step `k`. Autonomous systems take `None` and see `u = 0`.
pub fn integrate(
    system: &dyn OscillatorSystem,
    x0: &[f64],
    input: Option<&Trajectory>,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    if x0.len() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), got: x0.len() });
    }
    let n = step_count(dt, t_end)?;
    if let Some(u) = input {
        if (u.dt - dt).abs() > 1e-12 * dt || u.t0 != 0.0 {
            return Err(Error::InvalidArgument("input trajectory must share the integration grid".into()));
        }
        if u.len() < n {
            return Err(Error::TrajectoryTooShort { requested: n, achievable: u.len() });
        }
    }
    let dim = system.dim();
    let mut states = Vec::with_capacity((n + 1) * dim);
    let mut outputs = Vec::with_capacity(n + 1);
    let mut st = Stepper::new(x0);
    states.extend_from_slice(st.state());
    outputs.push(system.output(st.state()));
    for k in 0..n {
        let u = input.map_or(0.0, |tr| tr.outputs[k]);
        st.step(system, u, k as f64 * dt, dt)?;
        states.extend_from_slice(st.state());
        outputs.push(system.output(st.state()));
    }
    Trajectory::new(0.0, dt, dim, states, outputs)
}

/// A driver feeding any number of responders, advanced in lockstep
/// without storing the trajectory.
pub struct Cascade<'a> {
    driver: &'a dyn OscillatorSystem,
    driver_state: Stepper,
    responders: Vec<(&'a dyn OscillatorSystem, Stepper)>,
    dt: f64,
    step: u64,
}

impl<'a> Cascade<'a> {
    pub fn new(driver: &'a dyn OscillatorSystem, driver_x0: &[f64], dt: f64) -> Result<Self> {
        if driver_x0.len() != driver.dim() {
            return Err(Error::DimensionMismatch { expected: driver.dim(), got: driver_x0.len() });
        }
        step_count(dt, 0.0)?;
        Ok(Cascade { driver, driver_state: Stepper::new(driver_x0), responders: Vec::new(), dt, step: 0 })
    }

    pub fn with_responder(mut self, responder: &'a dyn OscillatorSystem, x0: &[f64]) -> Result<Self> {
        if x0.len() != responder.dim() {
            return Err(Error::DimensionMismatch { expected: responder.dim(), got: x0.len() });
        }
        self.responders.push((responder, Stepper::new(x0)));
        Ok(self)
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn driver_output(&self) -> f64 {
        self.driver.output(self.driver_state.state())
    }

    pub fn driver_state(&self) -> &[f64] {
        self.driver_state.state()
    }

    pub fn responder_output(&self, i: usize) -> f64 {
        let (sys, st) = &self.responders[i];
        sys.output(st.state())
    }

    pub fn responder_state(&self, i: usize) -> &[f64] {
        self.responders[i].1.state()
    }

    /// Advances one step and returns the input value that was held.
    pub fn advance(&mut self) -> Result<f64> {
        let u = self.driver_output();
        let t = self.time();
        for (sys, st) in &mut self.responders {
            st.step(*sys, u, t, self.dt)?;
        }
        self.driver_state.step(self.driver, 0.0, t, self.dt)?;
        self.step += 1;
        Ok(u)
    }

    pub fn advance_by(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.advance()?;
        }
        Ok(())
    }
}
