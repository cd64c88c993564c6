//! Query distortion caused by imperfect synchronization.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probmodel::Pmf;

/// Minimum paired samples for a trustworthy transition matrix.
pub const MIN_TRANSITION_SAMPLES: usize = 1000;

/// Pairs `(i, j)` of symbol indices at most one level apart.
pub fn one_level_band(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i.saturating_sub(1)..(i + 2).min(m)).map(move |j| (i, j))).collect()
}

/// `d̄ = Σ_{(y,ŷ) ∈ band} p_Y(y) |y − ŷ|²`; duplicate pairs count once.
pub fn distortion_bound(p_y: &Pmf, band: &[(usize, usize)]) -> Result<f64> {
    let m = p_y.len();
    let pairs: BTreeSet<(usize, usize)> = band.iter().copied().collect();
    let mut total = 0.0;
    for (i, j) in pairs {
        if i >= m || j >= m {
            return Err(Error::InvalidArgument(format!("band pair ({i}, {j}) outside an alphabet of {m} symbols")));
        }
        total += p_y.probs()[i] * squared_distance(p_y.alphabet().point(i), p_y.alphabet().point(j));
    }
    Ok(total)
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Empirical `p_{Ŷ|Y}` with rows for unseen `y` left undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub rows: Vec<Option<Vec<f64>>>,
    pub row_counts: Vec<usize>,
    /// Samples whose pair lies outside the asserted band.
    pub band_violations: usize,
    /// Fraction of samples outside the band.
    pub violation_mass: f64,
}

impl TransitionMatrix {
    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| match r {
            Some(r) => r.iter().enumerate().all(|(j, &p)| p == if i == j { 1.0 } else { 0.0 }),
            None => true,
        })
    }

    pub fn respects_band(&self) -> bool {
        self.band_violations == 0
    }
}

/// Tabulates `(y, ŷ)` index pairs and counts those outside `band`.
pub fn transition_matrix(m: usize, pairs: &[(usize, usize)], band: &[(usize, usize)]) -> Result<TransitionMatrix> {
    if pairs.len() < MIN_TRANSITION_SAMPLES {
        log::warn!("transition matrix estimated from only {} samples", pairs.len());
    }
    let allowed: BTreeSet<(usize, usize)> = band.iter().copied().collect();
    let mut counts = vec![vec![0usize; m]; m];
    let mut violations = 0;
    for &(y, yh) in pairs {
        if y >= m || yh >= m {
            return Err(Error::InvalidArgument(format!("pair ({y}, {yh}) outside an alphabet of {m} symbols")));
        }
        counts[y][yh] += 1;
        if !allowed.contains(&(y, yh)) {
            violations += 1;
        }
    }
    let row_counts: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let rows = counts
        .iter()
        .zip(&row_counts)
        .map(|(r, &n)| (n > 0).then(|| r.iter().map(|&c| c as f64 / n as f64).collect()))
        .collect();
    Ok(TransitionMatrix {
        rows,
        row_counts,
        band_violations: violations,
        violation_mass: if pairs.is_empty() { 0.0 } else { violations as f64 / pairs.len() as f64 },
    })
}
