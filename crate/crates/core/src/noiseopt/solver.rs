use serde::{Deserialize, Serialize};

use super::simplex::project_onto_simplex;
use super::NoiseDesignProblem;
use crate::error::{Error, Result};
use crate::probmodel::{LogBase, Pmf};

/// Largest query alphabet accepted by [`brute_force_solve`].
pub const BRUTE_FORCE_MAX_ALPHABET: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Constant step length.
    Fixed(f64),
    /// Armijo backtracking on the projected step, doubling the trial step
    /// after each accepted iteration.
    Backtracking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub step_rule: StepRule,
    /// Stop when the objective decreased by at most this over `stall_window` iterations.
    pub objective_tolerance: f64,
    pub stall_window: usize,
    /// Stop when `‖p − Π(p − ∇)‖` falls below this.
    pub gradient_tolerance: f64,
    /// Starting point; uniform when absent.
    pub initial_point: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 100_000,
            step_rule: StepRule::Backtracking,
            objective_tolerance: 1e-12,
            stall_window: 50,
            gradient_tolerance: 1e-8,
            initial_point: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.objective_tolerance > 0.0 && self.gradient_tolerance > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if let StepRule::Fixed(t) = self.step_rule {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument("fixed step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseSolution {
    pub p_v_star: Pmf,
    pub optimal_value: f64,
    pub base: LogBase,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the simplex-projected gradient step at the returned point.
    pub kkt_residual: f64,
    /// Objective value after every iteration; not serialized.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

fn projected_gradient_norm(x: &[f64], g: &[f64]) -> f64 {
    let mut y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    project_onto_simplex(&mut y);
    x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Projected gradient descent on the simplex.
///
/// Returns the best iterate found; `converged` is false when the iteration
/// budget ran out first.
pub fn solve(problem: &NoiseDesignProblem, options: &SolverOptions) -> Result<NoiseSolution> {
    options.validate()?;
    let m = problem.y_alphabet().len();
    let mut x = match &options.initial_point {
        Some(p) if p.len() == m => {
            let mut p = p.clone();
            project_onto_simplex(&mut p);
            p
        }
        Some(p) => return Err(Error::DimensionMismatch { expected: m, got: p.len() }),
        None => vec![1.0 / m as f64; m],
    };
    let mut f = problem.cost_raw(&x);
    let mut trace = vec![f];
    let mut step = match options.step_rule {
        StepRule::Fixed(t) => t,
        StepRule::Backtracking => 1.0,
    };
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < options.max_iterations {
        let g = problem.gradient_raw(&x);
        residual = projected_gradient_norm(&x, &g);
        if residual <= options.gradient_tolerance {
            converged = true;
            break;
        }
        let (x_new, f_new, t) = match options.step_rule {
            StepRule::Fixed(t) => {
                let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
                project_onto_simplex(&mut y);
                let fy = problem.cost_raw(&y);
                (y, fy, t)
            }
            StepRule::Backtracking => {
                let mut t = step;
                loop {
                    let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
                    project_onto_simplex(&mut y);
                    let fy = problem.cost_raw(&y);
                    let lin: f64 = y.iter().zip(&x).zip(&g).map(|((yi, xi), gi)| gi * (yi - xi)).sum();
                    let quad: f64 = y.iter().zip(&x).map(|(yi, xi)| (yi - xi).powi(2)).sum();
                    if fy <= f + lin + quad / (2.0 * t) || t < 1e-30 {
                        break (y, fy, t);
                    }
                    t *= 0.5;
                }
            }
        };
        iterations += 1;
        if f_new <= f {
            x = x_new;
            f = f_new;
        }
        trace.push(f);
        if options.step_rule == StepRule::Backtracking {
            step = 2.0 * t;
        }
        let w = options.stall_window;
        if trace.len() > w && trace[trace.len() - 1 - w] - f <= options.objective_tolerance {
            converged = true;
            let g = problem.gradient_raw(&x);
            residual = projected_gradient_norm(&x, &g);
            break;
        }
    }
    if !converged {
        log::warn!("noise solver stopped after {iterations} iterations without converging (residual {residual:e})");
    }
    Ok(NoiseSolution {
        p_v_star: Pmf::from_weights(problem.y_alphabet().clone(), x)?,
        optimal_value: f,
        base: problem.base(),
        iterations,
        converged,
        kkt_residual: residual,
        objective_trace: trace,
    })
}

/// Exhaustive minimization over the grid `{k · grid_step}` of the simplex.
/// Only query alphabets of at most [`BRUTE_FORCE_MAX_ALPHABET`] points.
pub fn brute_force_solve(problem: &NoiseDesignProblem, grid_step: f64) -> Result<NoiseSolution> {
    let m = problem.y_alphabet().len();
    if m > BRUTE_FORCE_MAX_ALPHABET {
        return Err(Error::AlphabetTooLarge { size: m, max: BRUTE_FORCE_MAX_ALPHABET });
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidArgument("grid step must be in (0, 1]".into()));
    }
    let n = (1.0 / grid_step).round() as usize;
    let nf = n as f64;
    let mut best = (f64::INFINITY, vec![0.0; m]);
    let mut visit = |p: Vec<f64>| {
        let c = problem.cost_raw(&p);
        if c < best.0 {
            best = (c, p);
        }
    };
    match m {
        1 => visit(vec![1.0]),
        2 => {
            for i in 0..=n {
                let a = i as f64 / nf;
                visit(vec![a, 1.0 - a]);
            }
        }
        _ => {
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let (a, b) = (i as f64 / nf, j as f64 / nf);
                    visit(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
    }
    let (value, p) = best;
    Ok(NoiseSolution {
        p_v_star: Pmf::from_weights(problem.y_alphabet().clone(), p)?,
        optimal_value: value,
        base: problem.base(),
        iterations: 0,
        converged: true,
        kkt_residual: f64::NAN,
        objective_trace: Vec::new(),
    })
}
