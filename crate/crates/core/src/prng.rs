//! Noise realizations from a synchronized chaotic output.
//!
//! The output support is cut into cells whose probabilities under the
//! empirical distribution match the target noise pmf; sampling the output
//! every `τ·Δ` and reporting the containing cell's symbol yields draws of
//! the noise. Both endpoints do this on their own synchronized copy.

use serde::{Deserialize, Serialize};

use crate::chaossim::integrate::stride_of;
use crate::chaossim::{Cascade, EmpiricalDistribution, Trajectory};
use crate::error::{Error, Result};
use crate::probmodel::{Alphabet, Pmf};

/// Default bound on `|ρ(τ)|` when choosing the sampling delay.
pub const DEFAULT_DELAY_THRESHOLD: f64 = 0.05;

/// Sample count below which cell boundaries are considered coarse.
pub const MIN_PARTITION_SAMPLES: usize = 100_000;

/// Ordered cells `(−∞, b₁), [b₁, b₂), …, [b_{M−1}, ∞)` with one symbol each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    pub boundaries: Vec<f64>,
    pub symbols: Alphabet,
    pub target_pmf: Vec<f64>,
    /// Cells of zero width; the quantizer never lands in them.
    pub empty_cells: Vec<bool>,
    pub delay_tau: Option<usize>,
    pub delta: Option<f64>,
}

impl CellPartition {
    pub fn new(boundaries: Vec<f64>, target: &Pmf) -> Result<Self> {
        let m = target.len();
        if boundaries.len() + 1 != m {
            return Err(Error::DimensionMismatch { expected: m - 1, got: boundaries.len() });
        }
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("cell boundaries must be finite".into()));
        }
        if boundaries.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("cell boundaries must be non-decreasing".into()));
        }
        let empty_cells = (0..m)
            .map(|i| {
                let interior_empty = i > 0 && i < m - 1 && boundaries[i - 1] == boundaries[i];
                interior_empty || target.probs()[i] == 0.0
            })
            .collect();
        Ok(CellPartition {
            boundaries,
            symbols: target.alphabet().clone(),
            target_pmf: target.probs().to_vec(),
            empty_cells,
            delay_tau: None,
            delta: None,
        })
    }

    pub fn with_sampling(mut self, tau: usize, delta: f64) -> Self {
        self.delay_tau = Some(tau);
        self.delta = Some(delta);
        self
    }

    pub fn len(&self) -> usize {
        self.target_pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target_pmf.is_empty()
    }

    pub fn target(&self) -> Result<Pmf> {
        Pmf::new(self.symbols.clone(), self.target_pmf.clone())
    }

    /// Index of the cell containing `s`; a sample on a boundary belongs to
    /// the cell on its right.
    pub fn cell_of(&self, s: f64) -> Result<usize> {
        if s.is_nan() {
            return Err(Error::NanInput);
        }
        Ok(self.boundaries.partition_point(|&b| b <= s))
    }

    /// `ψ(s)`: the symbol of the cell containing `s`.
    pub fn quantize(&self, s: f64) -> Result<&[f64]> {
        Ok(self.symbols.point(self.cell_of(s)?))
    }

    /// Fraction of `samples` falling in each cell.
    pub fn frequencies(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let mut counts = vec![0usize; self.len()];
        for &s in samples {
            counts[self.cell_of(s)?] += 1;
        }
        let n = samples.len().max(1) as f64;
        Ok(counts.into_iter().map(|c| c as f64 / n).collect())
    }
}

/// Places `b_i = F_S⁻¹(Σ_{j≤i} p_j)` using the interpolated empirical quantile.
pub fn build_cells(dist: &EmpiricalDistribution, target: &Pmf) -> Result<CellPartition> {
    if target.alphabet().dim() != 1 {
        return Err(Error::AlphabetMismatch("cell partitions need a scalar symbol alphabet".into()));
    }
    if dist.sorted_samples().is_empty() {
        return Err(Error::InvalidArgument("distribution carries no samples; rebuild it with estimate_density".into()));
    }
    if dist.sample_count < MIN_PARTITION_SAMPLES {
        log::warn!("cell boundaries placed from only {} samples", dist.sample_count);
    }
    let p = target.probs();
    let mut cumulative = 0.0;
    let mut boundaries = Vec::with_capacity(p.len().saturating_sub(1));
    for &pi in &p[..p.len() - 1] {
        cumulative += pi;
        let b = dist.quantile(cumulative.min(1.0));
        // keep zero-mass cells exactly empty despite rounding in the sum
        let b = match boundaries.last() {
            Some(&prev) if pi == 0.0 || b < prev => prev,
            _ => b,
        };
        boundaries.push(b);
    }
    CellPartition::new(boundaries, target)
}

/// Symbols drawn from an output series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationStream {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub sample_times: Vec<f64>,
    pub source: String,
    pub delta: f64,
    pub tau: usize,
}

impl RealizationStream {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Empirical symbol pmf over the partition's alphabet.
    pub fn empirical_pmf(&self, partition: &CellPartition) -> Result<Pmf> {
        let mut counts = vec![0.0; partition.len()];
        for &i in &self.indices {
            counts[i] += 1.0;
        }
        Pmf::from_weights(partition.symbols.clone(), counts)
    }
}

/// Where samples fall on the integration grid: step `start + j·spacing`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSchedule {
    pub start: u64,
    pub spacing: u64,
    pub delta: f64,
    pub tau: usize,
}

impl SampleSchedule {
    pub fn new(dt: f64, delta: f64, tau: usize, t_start: f64) -> Result<Self> {
        if tau == 0 {
            return Err(Error::InvalidArgument("delay tau must be at least 1".into()));
        }
        if !(t_start >= 0.0) {
            return Err(Error::InvalidArgument(format!("t_start must be non-negative, got {t_start}")));
        }
        let stride = stride_of(delta, dt)?;
        Ok(SampleSchedule { start: (t_start / dt).round() as u64, spacing: (stride * tau) as u64, delta, tau })
    }

    pub fn step(&self, j: u64) -> u64 {
        self.start + j * self.spacing
    }
}

/// Samples `trajectory.outputs` at `t_start + jτΔ` for `j < count`.
pub fn generate_stream(
    trajectory: &Trajectory,
    partition: &CellPartition,
    delta: f64,
    tau: usize,
    t_start: f64,
    count: usize,
) -> Result<RealizationStream> {
    let offset = t_start - trajectory.t0;
    if offset < -1e-9 * trajectory.dt {
        return Err(Error::InvalidArgument("t_start precedes the trajectory".into()));
    }
    let sched = SampleSchedule::new(trajectory.dt, delta, tau, offset.max(0.0))?;
    let len = trajectory.len() as u64;
    let achievable = if len > sched.start { ((len - 1 - sched.start) / sched.spacing + 1) as usize } else { 0 };
    if count > achievable {
        return Err(Error::TrajectoryTooShort { requested: count, achievable });
    }
    let mut stream = empty_stream("trajectory", delta, tau, count);
    for j in 0..count as u64 {
        let k = sched.step(j) as usize;
        push_sample(&mut stream, partition, trajectory.outputs[k], trajectory.time(k))?;
    }
    Ok(stream)
}

/// Streams `count` symbols from responder `responder` of a running cascade
/// without storing the trajectory. The cascade must not have advanced past
/// the first sample.
pub fn generate_stream_live(
    cascade: &mut Cascade<'_>,
    responder: usize,
    partition: &CellPartition,
    sched: SampleSchedule,
    count: usize,
) -> Result<RealizationStream> {
    if cascade.steps_taken() > sched.start {
        return Err(Error::InvalidArgument("cascade already past the first sample".into()));
    }
    let mut stream = empty_stream(&format!("responder {responder}"), sched.delta, sched.tau, count);
    for j in 0..count as u64 {
        let target = sched.step(j);
        cascade.advance_by((target - cascade.steps_taken()) as usize)?;
        push_sample(&mut stream, partition, cascade.responder_output(responder), cascade.time())?;
    }
    Ok(stream)
}

fn empty_stream(source: &str, delta: f64, tau: usize, count: usize) -> RealizationStream {
    RealizationStream {
        indices: Vec::with_capacity(count),
        values: Vec::with_capacity(count),
        sample_times: Vec::with_capacity(count),
        source: source.into(),
        delta,
        tau,
    }
}

fn push_sample(stream: &mut RealizationStream, partition: &CellPartition, s: f64, t: f64) -> Result<()> {
    let i = partition.cell_of(s)?;
    stream.indices.push(i);
    stream.values.push(partition.symbols.point(i)[0]);
    stream.sample_times.push(t);
    Ok(())
}
