//! Convergence certificate for input-driven responders.
//!
//! With a symmetric positive-definite `P`, define
//! `Q(ζ, u) = ½ (P J(ζ, u) + J(ζ, u)ᵀ P)` where `J = ∂r/∂ζ`. If every
//! eigenvalue of `Q` is at most `−c < 0` over the region of interest, any
//! two responders driven by the same input converge to each other with
//! rate `α = c / λ_max(P)` in the `P`-norm.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::system::AffineResponder;
use crate::error::{Error, Result};

/// Smallest separation from zero accepted as "strictly negative".
pub const MIN_SEPARATION: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    pub p: Vec<Vec<f64>>,
    /// Eigenvalues of `Q` at the worst sampled point, descending.
    pub q_eigenvalues: Vec<f64>,
    pub max_eigenvalue_of_q: f64,
    /// `c = −max λ(Q)`; only meaningful when positive.
    pub separation: f64,
    pub lambda_max_p: f64,
    /// `α = c / λ_max(P)` when valid, otherwise 0.
    pub decay_rate: f64,
    pub valid: bool,
}

/// Box of states and inputs over which a non-constant Jacobian is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub state_lo: Vec<f64>,
    pub state_hi: Vec<f64>,
    pub input_lo: f64,
    pub input_hi: f64,
    pub samples: usize,
    pub seed: u64,
}

fn rows_to_matrix(p: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = p.len();
    if n == 0 {
        return Err(Error::InvalidArgument("P is empty".into()));
    }
    if let Some(r) = p.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: r.len() });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| p[i][j]))
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Validates `P` and returns `λ_max(P)`.
fn check_p(p: &DMatrix<f64>) -> Result<f64> {
    let scale = p.amax().max(1.0);
    if (p - p.transpose()).amax() > 1e-12 * scale {
        return Err(Error::NotPositiveDefinite);
    }
    if p.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let ev = sorted_eigenvalues(p.clone());
    if ev.last().copied().unwrap_or(0.0) <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(ev[0])
}

fn q_matrix(p: &DMatrix<f64>, jac: &DMatrix<f64>) -> DMatrix<f64> {
    (p * jac + jac.transpose() * p) * 0.5
}

fn finish(p_rows: &[Vec<f64>], lambda_max_p: f64, q_eigenvalues: Vec<f64>) -> ConvergenceCertificate {
    let max_q = q_eigenvalues[0];
    let separation = -max_q;
    let valid = separation > MIN_SEPARATION;
    ConvergenceCertificate {
        p: p_rows.to_vec(),
        q_eigenvalues,
        max_eigenvalue_of_q: max_q,
        separation,
        lambda_max_p,
        decay_rate: if valid { separation / lambda_max_p } else { 0.0 },
        valid,
    }
}

/// Certificate for an affine responder, whose Jacobian is the constant `A`.
pub fn convergence_certificate(responder: &AffineResponder, p: &[Vec<f64>]) -> Result<ConvergenceCertificate> {
    let pm = rows_to_matrix(p)?;
    let a = responder.a_matrix();
    if pm.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: pm.nrows() });
    }
    let lambda_max_p = check_p(&pm)?;
    let ev = sorted_eigenvalues(q_matrix(&pm, &a));
    Ok(finish(p, lambda_max_p, ev))
}

/// Certificate for a general responder from its Jacobian, taking the worst
/// case of `λ_max(Q)` over uniform samples of `sample_box`.
pub fn sampled_convergence_certificate<J>(jacobian: J, p: &[Vec<f64>], sample_box: &SampleBox) -> Result<ConvergenceCertificate>
where
    J: Fn(&[f64], f64) -> DMatrix<f64>,
{
    let pm = rows_to_matrix(p)?;
    let n = pm.nrows();
    if sample_box.state_lo.len() != n || sample_box.state_hi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sample_box.state_lo.len() });
    }
    if sample_box.samples == 0 {
        return Err(Error::InvalidArgument("sample box needs at least one sample".into()));
    }
    let lambda_max_p = check_p(&pm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sample_box.seed);
    let mut worst: Option<Vec<f64>> = None;
    let mut state = vec![0.0; n];
    for _ in 0..sample_box.samples {
        for (i, s) in state.iter_mut().enumerate() {
            *s = sample_uniform(&mut rng, sample_box.state_lo[i], sample_box.state_hi[i]);
        }
        let u = sample_uniform(&mut rng, sample_box.input_lo, sample_box.input_hi);
        let jac = jacobian(&state, u);
        if jac.nrows() != n || jac.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: jac.nrows() });
        }
        let ev = sorted_eigenvalues(q_matrix(&pm, &jac));
        if worst.as_ref().is_none_or(|w| ev[0] > w[0]) {
            worst = Some(ev);
        }
    }
    Ok(finish(p, lambda_max_p, worst.expect("at least one sample")))
}

fn sample_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}
