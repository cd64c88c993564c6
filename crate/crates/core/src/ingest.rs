//! Probability model from categorical census records.
//!
//! Private attributes are encoded as integer vectors `x`, the query
//! attribute as an integer `y`; counting gives `p_X`, `p_Y` and the joint.
//! The UCI adult file layout (no header, 15 comma-separated columns) is
//! recognized, as is any CSV with a header naming the encoded columns.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noiseopt::NoiseDesignProblem;
use crate::probmodel::{mutual_information, Alphabet, Axis, JointPmf, LogBase, Pmf};

/// Column names of the adult `.data` / `.test` files.
pub const ADULT_COLUMNS: [&str; 15] = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
];

/// Default encoding shipped with the crate.
pub const DEFAULT_ENCODING_JSON: &str = include_str!("../data/adult_encoding.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub column: String,
    pub categories: BTreeMap<String, i64>,
}

impl CategoryMap {
    fn codes(&self) -> Vec<i64> {
        let mut c: Vec<i64> = self.categories.values().copied().collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Which columns form `X` (in order) and `Y`, and how their categories map
/// to integers. Values missing from a map cause the row to be dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeEncoding {
    pub private: Vec<CategoryMap>,
    pub query: CategoryMap,
}

impl Default for AttributeEncoding {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_ENCODING_JSON).expect("bundled encoding parses")
    }
}

impl AttributeEncoding {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::schema(path.display().to_string(), e))
    }

    /// Cartesian product of private codes, lexicographic.
    pub fn x_alphabet(&self) -> Result<Alphabet> {
        let mut points: Vec<Vec<f64>> = vec![Vec::new()];
        for attr in &self.private {
            points = points
                .into_iter()
                .flat_map(|p| {
                    attr.codes().into_iter().map(move |c| {
                        let mut q = p.clone();
                        q.push(c as f64);
                        q
                    })
                })
                .collect();
        }
        Alphabet::new(points)
    }

    pub fn y_alphabet(&self) -> Result<Alphabet> {
        let codes: Vec<f64> = self.query.codes().into_iter().map(|c| c as f64).collect();
        Alphabet::scalar(&codes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    /// Data rows read (blank and comment lines excluded).
    pub row_count: usize,
    pub dropped_rows: usize,
    /// Counts of unmapped values per column.
    pub unmapped: BTreeMap<String, usize>,
    pub p_x: Pmf,
    pub p_y: Pmf,
    pub joint: JointPmf,
    /// Raw counts, row-major over `X × Y`.
    pub counts: Vec<u64>,
}

impl DatasetSummary {
    pub fn used_rows(&self) -> usize {
        self.row_count - self.dropped_rows
    }
}

/// Reads a census file from `path`.
pub fn load_adult(path: &Path, encoding: &AttributeEncoding) -> Result<DatasetSummary> {
    let file = std::fs::File::open(path)?;
    load_adult_from(file, encoding)
}

pub fn load_adult_from<R: Read>(reader: R, encoding: &AttributeEncoding) -> Result<DatasetSummary> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'|'))
        .from_reader(reader);
    let mut records = rd.records();

    let wanted: Vec<&str> = encoding.private.iter().map(|a| a.column.as_str()).chain([encoding.query.column.as_str()]).collect();
    let mut first = None;
    for rec in records.by_ref() {
        let rec = rec?;
        if !is_blank(&rec) {
            first = Some(rec);
            break;
        }
    }
    let Some(first) = first else {
        return Err(Error::InvalidArgument("no records in input".into()));
    };
    let header: Option<Vec<String>> = {
        let names: Vec<String> = first.iter().map(str::to_string).collect();
        wanted.iter().all(|w| names.iter().any(|n| n == w)).then_some(names)
    };
    let names: Vec<String> = header.clone().unwrap_or_else(|| ADULT_COLUMNS.iter().map(|s| s.to_string()).collect());
    let col = |name: &str| names.iter().position(|n| n == name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    let private_cols: Vec<usize> = encoding.private.iter().map(|a| col(&a.column)).collect::<Result<_>>()?;
    let query_col = col(&encoding.query.column)?;

    let x_alpha = encoding.x_alphabet()?;
    let y_alpha = encoding.y_alphabet()?;
    let (nx, ny) = (x_alpha.len(), y_alpha.len());
    let mut counts = vec![0u64; nx * ny];
    let mut row_count = 0;
    let mut dropped = 0;
    let mut unmapped: BTreeMap<String, usize> = BTreeMap::new();

    let mut handle = |rec: &csv::StringRecord| -> Result<()> {
        row_count += 1;
        let mut x = Vec::with_capacity(private_cols.len());
        let mut ok = true;
        for (attr, &c) in encoding.private.iter().zip(&private_cols) {
            match rec.get(c).and_then(|v| attr.categories.get(v)) {
                Some(&code) => x.push(code as f64),
                None => {
                    ok = false;
                    *unmapped.entry(attr.column.clone()).or_default() += 1;
                }
            }
        }
        let y = rec.get(query_col).and_then(|v| encoding.query.categories.get(v));
        if y.is_none() {
            ok = false;
            *unmapped.entry(encoding.query.column.clone()).or_default() += 1;
        }
        if !ok {
            dropped += 1;
            return Ok(());
        }
        let xi = x_alpha.index_of(&x).expect("codes come from the encoding");
        let yi = y_alpha.index_of(&[*y.unwrap() as f64]).expect("codes come from the encoding");
        counts[xi * ny + yi] += 1;
        Ok(())
    };
    if header.is_none() {
        handle(&first)?;
    }
    for rec in records {
        let rec = rec?;
        if !is_blank(&rec) {
            handle(&rec)?;
        }
    }
    if dropped == row_count {
        return Err(Error::InvalidArgument(format!("no usable rows: all {row_count} had unmapped categories")));
    }
    if dropped > 0 {
        log::info!("dropped {dropped} of {row_count} rows with unmapped categories");
    }
    let joint = JointPmf::from_weights(x_alpha, y_alpha, counts.iter().map(|&c| c as f64).collect())?;
    Ok(DatasetSummary {
        row_count,
        dropped_rows: dropped,
        unmapped,
        p_x: joint.marginal(Axis::Row),
        p_y: joint.marginal(Axis::Column),
        joint,
        counts,
    })
}

fn is_blank(rec: &csv::StringRecord) -> bool {
    rec.iter().all(|f| f.is_empty())
}

/// `p_X` and `p_{Y|X}` from the joint; zero-mass `x` are left out.
pub fn problem_from_summary(summary: &DatasetSummary, base: LogBase) -> Result<NoiseDesignProblem> {
    NoiseDesignProblem::from_joint(&summary.joint, base)
}

/// Published census marginals: `p_X` over (sex, race) pairs in
/// lexicographic order.
pub const REFERENCE_P_X: [f64; 10] = [0.5888, 0.0200, 0.0056, 0.0560, 0.0038, 0.2616, 0.0110, 0.0042, 0.0468, 0.0022];

/// Published `p_Y` over query values 1…9 (sums to 1.0001 as printed).
pub const REFERENCE_P_Y: [f64; 9] = [0.6870, 0.0766, 0.0364, 0.0292, 0.0658, 0.0386, 0.0002, 0.0001, 0.0662];

/// Published joint cells `(x index, y index, mass)`.
pub const REFERENCE_JOINT_CELLS: [(usize, usize, f64); 10] = [
    (0, 0, 0.3974),
    (1, 0, 0.0130),
    (2, 0, 0.0044),
    (3, 0, 0.0388),
    (4, 0, 0.0032),
    (5, 8, 0.0222),
    (6, 8, 0.0014),
    (7, 8, 0.0008),
    (8, 8, 0.0046),
    (9, 8, 0.0004),
];

/// Published leakage of the undistorted query.
pub const REFERENCE_MUTUAL_INFORMATION: f64 = 0.0251;

pub fn reference_x_alphabet() -> Alphabet {
    AttributeEncoding::default().x_alphabet().expect("bundled encoding is valid")
}

pub fn reference_y_alphabet() -> Alphabet {
    Alphabet::integers(1, 9).expect("non-empty range")
}

pub fn reference_marginals() -> (Pmf, Pmf) {
    let p_x = Pmf::from_weights(reference_x_alphabet(), REFERENCE_P_X.to_vec()).expect("valid weights");
    let p_y = Pmf::from_weights(reference_y_alphabet(), REFERENCE_P_Y.to_vec()).expect("valid weights");
    (p_x, p_y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticJoint {
    pub joint: JointPmf,
    /// Tilt strength that hit the target leakage.
    pub theta: f64,
    pub mutual_information: f64,
    pub base: LogBase,
    pub seed: u64,
}

/// A joint consistent with the published marginals and joint cells whose
/// mutual information equals `target_mi` (in `base`).
///
/// Free cells start from `p_X(x) p_Y(y) exp(θ G(x, y))` with a seeded
/// standard-normal `G`, are rescaled by iterative proportional fitting to
/// the marginals left over after the fixed cells, and `θ` is bisected to
/// meet the target.
pub fn synthetic_census_joint(seed: u64, target_mi: f64, base: LogBase) -> Result<SyntheticJoint> {
    let (p_x, p_y) = reference_marginals();
    let (nx, ny) = (p_x.len(), p_y.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..nx * ny).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut fixed = vec![None; nx * ny];
    for &(i, j, m) in &REFERENCE_JOINT_CELLS {
        fixed[i * ny + j] = Some(m);
    }
    let row_target: Vec<f64> = (0..nx).map(|i| p_x.probs()[i] - (0..ny).filter_map(|j| fixed[i * ny + j]).sum::<f64>()).collect();
    let col_target: Vec<f64> = (0..ny).map(|j| p_y.probs()[j] - (0..nx).filter_map(|i| fixed[i * ny + j]).sum::<f64>()).collect();
    if row_target.iter().chain(&col_target).any(|&t| t < 0.0) {
        return Err(Error::InvalidDistribution("fixed cells exceed the marginals".into()));
    }

    let build = |theta: f64| -> Result<(JointPmf, f64)> {
        let mut w: Vec<f64> = (0..nx * ny)
            .map(|k| if fixed[k].is_some() { 0.0 } else { p_x.probs()[k / ny] * p_y.probs()[k % ny] * (theta * g[k]).exp() })
            .collect();
        fit_margins(&mut w, nx, ny, &row_target, &col_target);
        let probs: Vec<f64> = (0..nx * ny).map(|k| fixed[k].unwrap_or(w[k])).collect();
        let joint = JointPmf::from_weights(p_x.alphabet().clone(), p_y.alphabet().clone(), probs)?;
        let mi = mutual_information(&joint, base);
        Ok((joint, mi))
    };

    let (_, mi0) = build(0.0)?;
    if mi0 > target_mi {
        return Err(Error::InvalidArgument(format!("target leakage {target_mi} is below the untilted value {mi0}")));
    }
    let mut hi = 0.25;
    while build(hi)?.1 < target_mi {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(Error::InvalidArgument(format!("target leakage {target_mi} unreachable")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if build(mid)?.1 < target_mi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    let (joint, mi) = build(theta)?;
    Ok(SyntheticJoint { joint, theta, mutual_information: mi, base, seed })
}

/// Iterative proportional fitting of a non-negative `nx × ny` matrix to the
/// given row and column sums.
fn fit_margins(w: &mut [f64], nx: usize, ny: usize, rows: &[f64], cols: &[f64]) {
    for _ in 0..10_000 {
        for i in 0..nx {
            let s: f64 = w[i * ny..(i + 1) * ny].iter().sum();
            if s > 0.0 {
                w[i * ny..(i + 1) * ny].iter_mut().for_each(|v| *v *= rows[i] / s);
            }
        }
        let mut err: f64 = 0.0;
        for j in 0..ny {
            let s: f64 = (0..nx).map(|i| w[i * ny + j]).sum();
            if s > 0.0 {
                (0..nx).for_each(|i| w[i * ny + j] *= cols[j] / s);
            }
            err = err.max((s - cols[j]).abs());
        }
        if err < 1e-15 {
            break;
        }
    }
}
