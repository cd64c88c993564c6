//! Finite discrete distributions over real-vector alphabets and the
//! information measures computed from them.
//!
//! Everything here is dense: alphabets in this crate have at most a few
//! tens of points. All types are immutable once built.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance accepted on the total mass of user-supplied probabilities.
/// Stored values are renormalized so they sum to 1 within 1e-12.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Logarithm base used for entropies and mutual information.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogBase {
    /// Bits.
    #[default]
    #[serde(rename = "2")]
    Two,
    /// Nats.
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    /// `ln(base)`; divide a value in nats by this to convert.
    pub fn ln(self) -> f64 {
        match self {
            LogBase::Two => LN_2,
            LogBase::E => 1.0,
        }
    }

    pub fn from_nats(self, nats: f64) -> f64 {
        nats / self.ln()
    }

    pub fn to_nats(self, value: f64) -> f64 {
        value * self.ln()
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "bits" => Ok(LogBase::Two),
            "e" | "nats" => Ok(LogBase::E),
            other => Err(Error::InvalidArgument(format!(
                "log base must be '2' or 'e', got '{other}'"
            ))),
        }
    }
}

/// Bit-pattern key for exact point lookup. `-0.0` and `0.0` share a key.
fn point_key(point: &[f64]) -> Vec<u64> {
    point
        .iter()
        .map(|&v| if v == 0.0 { 0.0f64.to_bits() } else { v.to_bits() })
        .collect()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// An ordered set of distinct points of a common dimension.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Alphabet {
    dim: usize,
    points: Vec<Vec<f64>>,
    lookup: HashMap<Vec<u64>, usize>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}

impl Alphabet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("alphabet must contain at least one point".into()))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("alphabet points must have dimension >= 1".into()));
        }
        let mut lookup = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("alphabet point {i} is not finite")));
            }
            if lookup.insert(point_key(p), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate alphabet point {p:?}")));
            }
        }
        Ok(Alphabet { dim, points, lookup })
    }

    /// One-dimensional alphabet from scalar values.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        Alphabet::new(values.iter().map(|&v| vec![v]).collect())
    }

    /// The integers `lo..=hi` as a one-dimensional alphabet.
    pub fn integers(lo: i64, hi: i64) -> Result<Self> {
        Alphabet::new((lo..=hi).map(|v| vec![v as f64]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn index_of(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim {
            return None;
        }
        self.lookup.get(&point_key(point)).copied()
    }

    /// Index of the point closest in Euclidean distance; ties go to the lower index.
    pub fn nearest(&self, point: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d: f64 = p.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Returns a reordered copy together with the permutation applied:
    /// `new.point(k) == self.point(order[k])`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Alphabet::new(order.iter().map(|&i| self.points[i].clone()).collect())
    }
}

impl TryFrom<Vec<Vec<f64>>> for Alphabet {
    type Error = Error;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        Alphabet::new(points)
    }
}

impl From<Alphabet> for Vec<Vec<f64>> {
    fn from(a: Alphabet) -> Self {
        a.points
    }
}

/// All pairwise sums `{a_i + b_j}`, sorted lexicographically and deduplicated.
pub fn sumset_alphabet(a: &Alphabet, b: &Alphabet) -> Result<Alphabet> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let mut sums: Vec<Vec<f64>> = Vec::with_capacity(a.len() * b.len());
    for p in &a.points {
        for q in &b.points {
            sums.push(p.iter().zip(q).map(|(x, y)| x + y).collect());
        }
    }
    sums.sort_by(|x, y| lex_cmp(x, y));
    sums.dedup_by(|x, y| point_key(x) == point_key(y));
    Alphabet::new(sums)
}

fn check_probs(probs: &[f64], what: &str) -> Result<f64> {
    let mut total = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!("{what}: entry {i} = {p} is not a non-negative number")));
        }
        total += p;
    }
    Ok(total)
}

/// Probability mass function on an [`Alphabet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr", into = "PmfRepr")]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl TryFrom<PmfRepr> for Pmf {
    type Error = Error;
    fn try_from(r: PmfRepr) -> Result<Self> {
        Pmf::new(r.alphabet, r.probs)
    }
}

impl From<Pmf> for PmfRepr {
    fn from(p: Pmf) -> Self {
        PmfRepr { alphabet: p.alphabet, probs: p.probs }
    }
}

impl Pmf {
    /// Probabilities must sum to 1 within [`MASS_TOLERANCE`]; they are renormalized.
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        let total = check_probs(&probs, "pmf")?;
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("pmf mass is {total}, expected 1")));
        }
        Pmf::from_weights(alphabet, probs)
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != alphabet.len() {
            return Err(Error::DimensionMismatch { expected: alphabet.len(), got: weights.len() });
        }
        let total = check_probs(&weights, "pmf")?;
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("pmf has zero total mass".into()));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(Pmf { alphabet, probs })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        Pmf { alphabet, probs: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(alphabet: Alphabet, index: usize) -> Result<Self> {
        let mut probs = vec![0.0; alphabet.len()];
        *probs
            .get_mut(index)
            .ok_or_else(|| Error::InvalidArgument(format!("point index {index} out of range")))? = 1.0;
        Ok(Pmf { alphabet, probs })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob_of(&self, point: &[f64]) -> f64 {
        self.alphabet.index_of(point).map_or(0.0, |i| self.probs[i])
    }

    /// Expected value of each coordinate.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.alphabet.dim()];
        for (p, x) in self.probs.iter().zip(self.alphabet.points()) {
            for (mi, xi) in m.iter_mut().zip(x) {
                *mi += p * xi;
            }
        }
        m
    }

    pub fn total_variation(&self, other: &Pmf) -> Result<f64> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch("total variation needs equal alphabets".into()));
        }
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }
}

/// Which variable of a joint distribution to keep when marginalizing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

/// Joint pmf of two variables stored as a dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct JointPmf {
    row_alphabet: Alphabet,
    col_alphabet: Alphabet,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    row_alphabet: Alphabet,
    col_alphabet: Alphabet,
    probs: Vec<Vec<f64>>,
}

fn flatten(rows: Vec<Vec<f64>>, ncols: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(rows.len() * ncols);
    for r in rows {
        if r.len() != ncols {
            return Err(Error::DimensionMismatch { expected: ncols, got: r.len() });
        }
        out.extend(r);
    }
    Ok(out)
}

fn unflatten(probs: &[f64], ncols: usize) -> Vec<Vec<f64>> {
    probs.chunks(ncols).map(<[f64]>::to_vec).collect()
}

impl TryFrom<MatrixRepr> for JointPmf {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        if r.probs.len() != r.row_alphabet.len() {
            return Err(Error::DimensionMismatch { expected: r.row_alphabet.len(), got: r.probs.len() });
        }
        let probs = flatten(r.probs, r.col_alphabet.len())?;
        JointPmf::new(r.row_alphabet, r.col_alphabet, probs)
    }
}

impl From<JointPmf> for MatrixRepr {
    fn from(j: JointPmf) -> Self {
        let probs = unflatten(&j.probs, j.col_alphabet.len());
        MatrixRepr { row_alphabet: j.row_alphabet, col_alphabet: j.col_alphabet, probs }
    }
}

impl JointPmf {
    /// `probs` is row-major, `rows × cols`, and must sum to 1 within [`MASS_TOLERANCE`].
    pub fn new(row_alphabet: Alphabet, col_alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        let total = check_probs(&probs, "joint pmf")?;
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("joint mass is {total}, expected 1")));
        }
        JointPmf::from_weights(row_alphabet, col_alphabet, probs)
    }

    pub fn from_weights(row_alphabet: Alphabet, col_alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        let expected = row_alphabet.len() * col_alphabet.len();
        if weights.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: weights.len() });
        }
        let total = check_probs(&weights, "joint pmf")?;
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("joint pmf has zero total mass".into()));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(JointPmf { row_alphabet, col_alphabet, probs })
    }

    /// Empirical joint from paired index samples (plug-in estimate).
    pub fn from_counts(
        row_alphabet: Alphabet,
        col_alphabet: Alphabet,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let cols = col_alphabet.len();
        let mut counts = vec![0.0; row_alphabet.len() * cols];
        for (r, c) in pairs {
            if r >= row_alphabet.len() || c >= cols {
                return Err(Error::InvalidArgument(format!("sample index ({r}, {c}) out of range")));
            }
            counts[r * cols + c] += 1.0;
        }
        JointPmf::from_weights(row_alphabet, col_alphabet, counts)
    }

    /// Builds `p(x) p(y|x)`.
    pub fn from_conditional(p_given: &Pmf, conditional: &ConditionalPmf) -> Result<Self> {
        if p_given.alphabet() != conditional.given_alphabet() {
            return Err(Error::AlphabetMismatch("marginal and conditional disagree on the conditioning alphabet".into()));
        }
        let cols = conditional.out_alphabet().len();
        let mut probs = Vec::with_capacity(p_given.len() * cols);
        for (i, &px) in p_given.probs().iter().enumerate() {
            probs.extend(conditional.row(i).iter().map(|c| px * c));
        }
        JointPmf::from_weights(p_given.alphabet().clone(), conditional.out_alphabet().clone(), probs)
    }

    pub fn row_alphabet(&self) -> &Alphabet {
        &self.row_alphabet
    }

    pub fn col_alphabet(&self) -> &Alphabet {
        &self.col_alphabet
    }

    pub fn rows(&self) -> usize {
        self.row_alphabet.len()
    }

    pub fn cols(&self) -> usize {
        self.col_alphabet.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.probs[r * self.cols() + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.probs[r * c..(r + 1) * c]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.probs.chunks(self.cols()).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols()];
        for row in self.probs.chunks(self.cols()) {
            for (s, p) in sums.iter_mut().zip(row) {
                *s += p;
            }
        }
        sums
    }

    /// Marginal of the variable on `axis`, summing over the other one.
    pub fn marginal(&self, axis: Axis) -> Pmf {
        let (alphabet, probs) = match axis {
            Axis::Row => (self.row_alphabet.clone(), self.row_sums()),
            Axis::Column => (self.col_alphabet.clone(), self.col_sums()),
        };
        Pmf { alphabet, probs }
    }

    pub fn transpose(&self) -> JointPmf {
        let (r, c) = (self.rows(), self.cols());
        let mut probs = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                probs[j * r + i] = self.probs[i * c + j];
            }
        }
        JointPmf { row_alphabet: self.col_alphabet.clone(), col_alphabet: self.row_alphabet.clone(), probs }
    }

    /// Splits into the row marginal and the row-conditional `p(col | row)`.
    /// Rows with zero mass carry no conditional and are dropped; their
    /// original indices are returned.
    pub fn condition_on_rows(&self) -> Result<(Pmf, ConditionalPmf, Vec<usize>)> {
        let sums = self.row_sums();
        let kept: Vec<usize> = (0..self.rows()).filter(|&i| sums[i] > 0.0).collect();
        let given = self.row_alphabet.permuted(&kept)?;
        let mut rows = Vec::with_capacity(kept.len() * self.cols());
        for &i in &kept {
            rows.extend(self.row(i).iter().map(|p| p / sums[i]));
        }
        let marginal = Pmf::from_weights(given.clone(), kept.iter().map(|&i| sums[i]).collect())?;
        let cond = ConditionalPmf::from_rows_unchecked(given, self.col_alphabet.clone(), rows);
        Ok((marginal, cond, kept))
    }
}

/// Conditional pmf `p(out | given)`, one row per conditioning point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CondRepr", into = "CondRepr")]
pub struct ConditionalPmf {
    given_alphabet: Alphabet,
    out_alphabet: Alphabet,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CondRepr {
    given_alphabet: Alphabet,
    out_alphabet: Alphabet,
    probs: Vec<Vec<f64>>,
}

impl TryFrom<CondRepr> for ConditionalPmf {
    type Error = Error;
    fn try_from(r: CondRepr) -> Result<Self> {
        ConditionalPmf::new(r.given_alphabet, r.out_alphabet, r.probs)
    }
}

impl From<ConditionalPmf> for CondRepr {
    fn from(c: ConditionalPmf) -> Self {
        let probs = unflatten(&c.probs, c.out_alphabet.len());
        CondRepr { given_alphabet: c.given_alphabet, out_alphabet: c.out_alphabet, probs }
    }
}

impl ConditionalPmf {
    pub fn new(given_alphabet: Alphabet, out_alphabet: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != given_alphabet.len() {
            return Err(Error::DimensionMismatch { expected: given_alphabet.len(), got: rows.len() });
        }
        let cols = out_alphabet.len();
        let mut probs = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: row.len() });
            }
            let total = check_probs(&row, "conditional pmf")?;
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidDistribution(format!("conditional row {i} has mass {total}")));
            }
            probs.extend(row.into_iter().map(|p| p / total));
        }
        Ok(ConditionalPmf { given_alphabet, out_alphabet, probs })
    }

    fn from_rows_unchecked(given_alphabet: Alphabet, out_alphabet: Alphabet, probs: Vec<f64>) -> Self {
        ConditionalPmf { given_alphabet, out_alphabet, probs }
    }

    pub fn given_alphabet(&self) -> &Alphabet {
        &self.given_alphabet
    }

    pub fn out_alphabet(&self) -> &Alphabet {
        &self.out_alphabet
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.out_alphabet.len();
        &self.probs[i * c..(i + 1) * c]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `Σ_x p(x) p(out | x)`.
    pub fn output_marginal(&self, p_given: &Pmf) -> Result<Pmf> {
        Ok(JointPmf::from_conditional(p_given, self)?.marginal(Axis::Column))
    }

    pub fn permute_given(&self, order: &[usize]) -> Result<Self> {
        let given = self.given_alphabet.permuted(order)?;
        let mut probs = Vec::with_capacity(self.probs.len());
        for &i in order {
            probs.extend_from_slice(self.row(i));
        }
        Ok(ConditionalPmf { given_alphabet: given, out_alphabet: self.out_alphabet.clone(), probs })
    }
}

/// Shannon entropy, with `0 log 0 = 0`.
pub fn entropy(p: &Pmf, base: LogBase) -> f64 {
    let nats: f64 = p.probs.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.ln()).sum();
    base.from_nats(nats.max(0.0))
}

/// Relative entropy between `joint` and the product of its marginals.
///
/// Zero-probability cells contribute nothing. A positive cell whose
/// marginals multiply to zero cannot occur in a valid joint and panics.
pub fn mutual_information(joint: &JointPmf, base: LogBase) -> f64 {
    let pr = joint.row_sums();
    let pc = joint.col_sums();
    let cols = joint.cols();
    let mut nats = 0.0;
    for (i, row) in joint.probs.chunks(cols).enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                let q = pr[i] * pc[j];
                assert!(q > 0.0, "joint cell ({i}, {j}) has mass {p} but its marginals multiply to zero");
                nats += p * (p / q).ln();
            }
        }
    }
    base.from_nats(nats.max(0.0))
}
