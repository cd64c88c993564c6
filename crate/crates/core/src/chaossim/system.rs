//! Vector fields of the driver and responder oscillators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ODE `ẋ = f(x, u, t)` with a scalar input `u` and a scalar output
/// read from one state coordinate.
pub trait OscillatorSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, state: &[f64], input: f64, t: f64, out: &mut [f64]);

    fn output_index(&self) -> usize;

    fn output(&self, state: &[f64]) -> f64 {
        state[self.output_index()]
    }
}

/// Lorenz system; emits its first state as the driving signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzDriver {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for LorenzDriver {
    fn default() -> Self {
        LorenzDriver { sigma: 10.0, rho: 28.0, beta: 8.0 / 3.0 }
    }
}

impl OscillatorSystem for LorenzDriver {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, x: &[f64], _u: f64, _t: f64, out: &mut [f64]) {
        out[0] = self.sigma * (x[1] - x[0]);
        out[1] = self.rho * x[0] - x[1] - x[0] * x[2];
        out[2] = -self.beta * x[2] + x[0] * x[1];
    }

    fn output_index(&self) -> usize {
        0
    }
}

/// Single-state system that never moves: `u(t)` is its initial value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantDriver;

impl OscillatorSystem for ConstantDriver {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _x: &[f64], _u: f64, _t: f64, out: &mut [f64]) {
        out[0] = 0.0;
    }

    fn output_index(&self) -> usize {
        0
    }
}

/// `ẋ₁ = ω x₂, ẋ₂ = −ω x₁`; output `x₁`. Periodic baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicDriver {
    pub omega: f64,
}

impl OscillatorSystem for HarmonicDriver {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, x: &[f64], _u: f64, _t: f64, out: &mut [f64]) {
        out[0] = self.omega * x[1];
        out[1] = -self.omega * x[0];
    }

    fn output_index(&self) -> usize {
        0
    }
}

/// Any autonomous driver the pipeline knows how to build from config.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Driver {
    Lorenz(LorenzDriver),
    Constant,
    Harmonic(HarmonicDriver),
}

impl Default for Driver {
    fn default() -> Self {
        Driver::Lorenz(LorenzDriver::default())
    }
}

impl OscillatorSystem for Driver {
    fn dim(&self) -> usize {
        match self {
            Driver::Lorenz(d) => d.dim(),
            Driver::Constant => ConstantDriver.dim(),
            Driver::Harmonic(d) => d.dim(),
        }
    }

    fn rhs(&self, x: &[f64], u: f64, t: f64, out: &mut [f64]) {
        match self {
            Driver::Lorenz(d) => d.rhs(x, u, t, out),
            Driver::Constant => ConstantDriver.rhs(x, u, t, out),
            Driver::Harmonic(d) => d.rhs(x, u, t, out),
        }
    }

    fn output_index(&self) -> usize {
        0
    }
}

/// One component of the input map `ψ(u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputTerm {
    Zero,
    Constant(f64),
    Linear(f64),
    /// `c · u²`
    Quadratic(f64),
    /// `c · sin(u)`
    Sine(f64),
    /// `c · cos(u)`
    Cosine(f64),
}

impl InputTerm {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            InputTerm::Zero => 0.0,
            InputTerm::Constant(c) => c,
            InputTerm::Linear(c) => c * u,
            InputTerm::Quadratic(c) => c * u * u,
            InputTerm::Sine(c) => c * u.sin(),
            InputTerm::Cosine(c) => c * u.cos(),
        }
    }
}

/// Responder `ζ̇ = A ζ + ψ(u)` with output `ζ[output_index]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ResponderRepr", into = "ResponderRepr")]
pub struct AffineResponder {
    n: usize,
    /// Row-major `n × n`.
    a: Vec<f64>,
    input_map: Vec<InputTerm>,
    output_index: usize,
}

#[derive(Serialize, Deserialize)]
struct ResponderRepr {
    a: Vec<Vec<f64>>,
    input_map: Vec<InputTerm>,
    output_index: usize,
}

impl TryFrom<ResponderRepr> for AffineResponder {
    type Error = Error;
    fn try_from(r: ResponderRepr) -> Result<Self> {
        AffineResponder::new(r.a, r.input_map, r.output_index)
    }
}

impl From<AffineResponder> for ResponderRepr {
    fn from(r: AffineResponder) -> Self {
        ResponderRepr { a: r.a_rows(), input_map: r.input_map, output_index: r.output_index }
    }
}

impl AffineResponder {
    pub fn new(a: Vec<Vec<f64>>, input_map: Vec<InputTerm>, output_index: usize) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidArgument("responder matrix is empty".into()));
        }
        if let Some(row) = a.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        if input_map.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: input_map.len() });
        }
        if output_index >= n {
            return Err(Error::InvalidArgument(format!("output index {output_index} out of range for dimension {n}")));
        }
        Ok(AffineResponder { n, a: a.into_iter().flatten().collect(), input_map, output_index })
    }

    /// `A = diag(−1, −2.5)`, `ψ(u) = (−5u², 50 sin u)`, output the second state.
    pub fn standard() -> Self {
        AffineResponder::new(
            vec![vec![-1.0, 0.0], vec![0.0, -2.5]],
            vec![InputTerm::Quadratic(-5.0), InputTerm::Sine(50.0)],
            1,
        )
        .expect("valid built-in responder")
    }

    pub fn a_rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn a_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.a)
    }

    pub fn input_map(&self) -> &[InputTerm] {
        &self.input_map
    }

    /// `∂r/∂ζ`, constant for this family.
    pub fn jacobian(&self, _state: &[f64], _input: f64) -> DMatrix<f64> {
        self.a_matrix()
    }
}

impl OscillatorSystem for AffineResponder {
    fn dim(&self) -> usize {
        self.n
    }

    fn rhs(&self, z: &[f64], u: f64, _t: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.a[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>() + self.input_map[i].eval(u);
        }
    }

    fn output_index(&self) -> usize {
        self.output_index
    }
}

/// Wraps a closure as a system; handy for ad-hoc vector fields.
pub struct FnSystem<F> {
    pub dim: usize,
    pub output_index: usize,
    pub f: F,
}

impl<F> OscillatorSystem for FnSystem<F>
where
    F: Fn(&[f64], f64, f64, &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, state: &[f64], input: f64, t: f64, out: &mut [f64]) {
        (self.f)(state, input, t, out)
    }

    fn output_index(&self) -> usize {
        self.output_index
    }
}
