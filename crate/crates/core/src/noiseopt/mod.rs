//! Optimal additive noise design.
//!
//! Given the private data distribution `p_X` and the query channel
//! `p_{Y|X}`, the released response is `Z = Y + V` with `V` independent of
//! `Y` and supported on the query alphabet. The leakage `I[X; Z]` is a
//! convex function of `p_V` ([`NoiseDesignProblem::cost`]); [`solve`]
//! minimizes it over the simplex.

mod simplex;
mod solver;

pub use simplex::{project_onto_simplex, projected};
pub use solver::{brute_force_solve, solve, NoiseSolution, SolverOptions, StepRule, BRUTE_FORCE_MAX_ALPHABET};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probmodel::{
    mutual_information, sumset_alphabet, Alphabet, ConditionalPmf, JointPmf, LogBase, Pmf,
};

/// Smallest probability fed to a logarithm when a gradient term diverges.
const LOG_FLOOR: f64 = 1e-300;

/// `p_X`, `p_{Y|X}` and the derived response alphabet `Y ⊕ Y`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ProblemRepr", into = "ProblemRepr")]
pub struct NoiseDesignProblem {
    p_x: Pmf,
    p_y_given_x: ConditionalPmf,
    base: LogBase,
    p_y: Pmf,
    z_alphabet: Alphabet,
    /// `sum_index[y * M + v]` is the index of `y + v` in `z_alphabet`.
    sum_index: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ProblemRepr {
    p_x: Pmf,
    p_y_given_x: ConditionalPmf,
    #[serde(default)]
    base: LogBase,
}

impl TryFrom<ProblemRepr> for NoiseDesignProblem {
    type Error = Error;
    fn try_from(r: ProblemRepr) -> Result<Self> {
        NoiseDesignProblem::new(r.p_x, r.p_y_given_x, r.base)
    }
}

impl From<NoiseDesignProblem> for ProblemRepr {
    fn from(p: NoiseDesignProblem) -> Self {
        ProblemRepr { p_x: p.p_x, p_y_given_x: p.p_y_given_x, base: p.base }
    }
}

impl NoiseDesignProblem {
    pub fn new(p_x: Pmf, p_y_given_x: ConditionalPmf, base: LogBase) -> Result<Self> {
        if p_x.alphabet() != p_y_given_x.given_alphabet() {
            return Err(Error::AlphabetMismatch(
                "p_X and p_{Y|X} must share the private-data alphabet".into(),
            ));
        }
        let p_y = p_y_given_x.output_marginal(&p_x)?;
        let y = p_y_given_x.out_alphabet();
        let z_alphabet = sumset_alphabet(y, y)?;
        let m = y.len();
        let mut sum_index = Vec::with_capacity(m * m);
        for a in y.points() {
            for b in y.points() {
                let s: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                sum_index.push(z_alphabet.index_of(&s).expect("sumset contains every pairwise sum"));
            }
        }
        Ok(NoiseDesignProblem { p_x, p_y_given_x, base, p_y, z_alphabet, sum_index })
    }

    pub fn from_joint(joint: &JointPmf, base: LogBase) -> Result<Self> {
        let (p_x, cond, _) = joint.condition_on_rows()?;
        NoiseDesignProblem::new(p_x, cond, base)
    }

    pub fn with_base(&self, base: LogBase) -> Self {
        NoiseDesignProblem { base, ..self.clone() }
    }

    pub fn p_x(&self) -> &Pmf {
        &self.p_x
    }

    pub fn p_y_given_x(&self) -> &ConditionalPmf {
        &self.p_y_given_x
    }

    pub fn p_y(&self) -> &Pmf {
        &self.p_y
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        self.p_x.alphabet()
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        self.p_y_given_x.out_alphabet()
    }

    pub fn z_alphabet(&self) -> &Alphabet {
        &self.z_alphabet
    }

    pub fn base(&self) -> LogBase {
        self.base
    }

    /// Index in the response alphabet of `y_i + y_j`.
    pub fn sum_index(&self, y: usize, v: usize) -> usize {
        self.sum_index[y * self.y_alphabet().len() + v]
    }

    /// Leakage without noise, `I[X; Y]`.
    pub fn undistorted_information(&self) -> f64 {
        let joint = JointPmf::from_conditional(&self.p_x, &self.p_y_given_x)
            .expect("alphabets checked at construction");
        mutual_information(&joint, self.base)
    }

    /// Rows of `p_{Z|X}` (row-major) and `p_Z` for a noise vector over `Y`.
    pub fn response_distribution(&self, p_v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.y_alphabet().len();
        let k = self.z_alphabet.len();
        let nx = self.x_alphabet().len();
        let mut pzx = vec![0.0; nx * k];
        for x in 0..nx {
            let row = self.p_y_given_x.row(x);
            let out = &mut pzx[x * k..(x + 1) * k];
            for (y, &c) in row.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (v, &pv) in p_v.iter().enumerate() {
                    out[self.sum_index[y * m + v]] += c * pv;
                }
            }
        }
        let mut pz = vec![0.0; k];
        for (x, &px) in self.p_x.probs().iter().enumerate() {
            for (z, &q) in pzx[x * k..(x + 1) * k].iter().enumerate() {
                pz[z] += px * q;
            }
        }
        (pzx, pz)
    }

    fn check_noise(&self, p_v: &Pmf) -> Result<()> {
        if p_v.alphabet() != self.y_alphabet() {
            return Err(Error::AlphabetMismatch("noise pmf must live on the query alphabet".into()));
        }
        Ok(())
    }

    /// `I[X; Y + V]` for the given noise distribution.
    pub fn cost(&self, p_v: &Pmf) -> Result<f64> {
        self.check_noise(p_v)?;
        Ok(self.cost_raw(p_v.probs()))
    }

    /// Cost on a raw probability vector indexed like the query alphabet.
    pub fn cost_raw(&self, p_v: &[f64]) -> f64 {
        let (pzx, pz) = self.response_distribution(p_v);
        let k = self.z_alphabet.len();
        let mut nats = 0.0;
        for (x, &px) in self.p_x.probs().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (z, &q) in pzx[x * k..(x + 1) * k].iter().enumerate() {
                if q > 0.0 {
                    nats += px * q * (q / pz[z]).ln();
                }
            }
        }
        self.base.from_nats(nats.max(0.0))
    }

    /// Gradient of [`cost`](Self::cost) with respect to each `p_V(v)`.
    pub fn cost_gradient(&self, p_v: &Pmf) -> Result<Vec<f64>> {
        self.check_noise(p_v)?;
        Ok(self.gradient_raw(p_v.probs()))
    }

    /// `∂I/∂p_V(v) = Σ_x p(x) Σ_y p(y|x) ln(p(y+v|x) / p(y+v))`.
    ///
    /// When `p(y+v)` vanishes the one-sided limit `ln(p(y|x) / p(y))` is
    /// used; a vanishing `p(y+v|x)` under a positive `p(y+v)` diverges to
    /// `-∞` and is floored.
    pub fn gradient_raw(&self, p_v: &[f64]) -> Vec<f64> {
        let (pzx, pz) = self.response_distribution(p_v);
        let m = self.y_alphabet().len();
        let k = self.z_alphabet.len();
        let py = self.p_y.probs();
        let mut grad = vec![0.0; m];
        for (x, &px) in self.p_x.probs().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let row = self.p_y_given_x.row(x);
            for (y, &c) in row.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (v, g) in grad.iter_mut().enumerate() {
                    let z = self.sum_index[y * m + v];
                    let ratio = if pz[z] > 0.0 {
                        pzx[x * k + z].max(LOG_FLOOR) / pz[z]
                    } else {
                        c / py[y]
                    };
                    *g += px * c * ratio.ln();
                }
            }
        }
        let scale = self.base.ln();
        grad.iter_mut().for_each(|g| *g /= scale);
        grad
    }

    /// Reorders the private-data alphabet.
    pub fn permute_x(&self, order: &[usize]) -> Result<Self> {
        let p_x = Pmf::from_weights(
            self.x_alphabet().permuted(order)?,
            order.iter().map(|&i| self.p_x.probs()[i]).collect(),
        )?;
        NoiseDesignProblem::new(p_x, self.p_y_given_x.permute_given(order)?, self.base)
    }
}

/// Random instance with `X = {0..n_x-1}`, `Y = {0..n_y-1}` and uniform
/// random weights for `p_X` and every row of `p_{Y|X}`.
pub fn random_problem<R: Rng + ?Sized>(rng: &mut R, n_x: usize, n_y: usize, base: LogBase) -> Result<NoiseDesignProblem> {
    let xa = Alphabet::integers(0, n_x as i64 - 1)?;
    let ya = Alphabet::integers(0, n_y as i64 - 1)?;
    let weights = |rng: &mut R, n: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let t: f64 = w.iter().sum();
        w.into_iter().map(|x| x / t).collect()
    };
    let p_x = Pmf::from_weights(xa.clone(), weights(rng, n_x))?;
    let rows = (0..n_x).map(|_| weights(rng, n_y)).collect();
    NoiseDesignProblem::new(p_x, ConditionalPmf::new(xa, ya, rows)?, base)
}
