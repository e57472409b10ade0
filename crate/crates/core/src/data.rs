//! Binary-classification datasets: CSV loading, min-max scaling, seeded
//! label noise and stratified splitting.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Class label of a binary problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "-1")]
    Neg,
    #[serde(rename = "+1")]
    Pos,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn value<T: Scalar>(self) -> T {
        match self {
            Label::Pos => T::one(),
            Label::Neg => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    pub fn from_sign(s: i8) -> Option<Self> {
        match s {
            1 => Some(Label::Pos),
            -1 => Some(Label::Neg),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Pos => "+1",
            Label::Neg => "-1",
        })
    }
}

/// Labeled feature vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    name: String,
    dim: usize,
    features: Vec<T>,
    labels: Vec<Label>,
    memberships: Option<Vec<T>>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset and checks every structural invariant, including the
    /// presence of both classes.
    pub fn new(
        name: impl Into<String>,
        rows: Vec<Vec<T>>,
        labels: Vec<Label>,
        memberships: Option<Vec<T>>,
    ) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::InvalidDataset(format!(
                "row {i} has {} features, expected {dim}",
                r.len()
            )));
        }
        let features = rows.into_iter().flatten().collect();
        let ds = Self::from_flat(name, dim, features, labels, memberships)?;
        ds.require_both_classes()?;
        Ok(ds)
    }

    /// Builds a dataset from row-major storage. Does not require both classes
    /// to be present.
    pub fn from_flat(
        name: impl Into<String>,
        dim: usize,
        features: Vec<T>,
        labels: Vec<Label>,
        memberships: Option<Vec<T>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("dimensionality must be at least 1".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature values do not form {} rows of width {dim}",
                features.len(),
                labels.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        if let Some(m) = &memberships {
            if m.len() != labels.len() {
                return Err(Error::LengthMismatch {
                    expected: labels.len(),
                    got: m.len(),
                });
            }
            if let Some(v) = m.iter().find(|&&v| !(v > T::zero() && v <= T::one())) {
                return Err(Error::InvalidDataset(format!(
                    "membership {v} outside (0, 1]"
                )));
            }
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        Ok(Self {
            name: name.into(),
            dim,
            features,
            labels,
            memberships,
        })
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::InvalidDataset("at least two samples required".into()));
        }
        for l in [Label::Neg, Label::Pos] {
            if self.class_count(l) == 0 {
                return Err(Error::ClassTooSmall {
                    label: l.sign(),
                    count: 0,
                    required: 1,
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn memberships(&self) -> Option<&[T]> {
        self.memberships.as_deref()
    }

    pub fn class_count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_memberships(self, memberships: Vec<T>) -> Result<Self> {
        Self::from_flat(
            self.name,
            self.dim,
            self.features,
            self.labels,
            Some(memberships),
        )
    }

    /// Rows selected by `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Self {
            name: self.name.clone(),
            dim: self.dim,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            memberships: self
                .memberships
                .as_ref()
                .map(|m| indices.iter().map(|&i| m[i]).collect()),
        }
    }

    /// Casts every value to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        let conv = |v: &T| U::lit(v.to_f64_lossy());
        Dataset {
            name: self.name.clone(),
            dim: self.dim,
            features: self.features.iter().map(conv).collect(),
            labels: self.labels.clone(),
            memberships: self.memberships.as_ref().map(|m| m.iter().map(conv).collect()),
        }
    }
}

/// Which CSV column carries the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl Default for LabelColumn {
    /// The last column.
    fn default() -> Self {
        LabelColumn::Index(usize::MAX)
    }
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Reads a headed, comma-separated file. The lexicographically smaller raw
/// label becomes `-1`; all other columns must be numeric.
///
/// `LabelColumn::Index(usize::MAX)` (the default) selects the last column.
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset<T>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, label_column, name)
}

/// Like [`load_csv`], over any reader.
pub fn read_csv<T: Scalar, R: std::io::Read>(
    reader: R,
    label_column: &LabelColumn,
    name: impl Into<String>,
) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let width = header.len();
    let label_idx = match label_column {
        LabelColumn::Index(usize::MAX) if width > 0 => width - 1,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => return Err(Error::UnknownLabelColumn(i.to_string())),
        LabelColumn::Name(n) => header
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::UnknownLabelColumn(n.clone()))?,
    };
    if width < 2 {
        return Err(Error::InvalidDataset(
            "need a label column and at least one feature column".into(),
        ));
    }

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        // Header is line 1.
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(k + 2);
        if rec.len() != width {
            return Err(Error::RaggedRow {
                line,
                expected: width,
                found: rec.len(),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                if cell.is_empty() {
                    return Err(Error::MissingValue {
                        line,
                        column: header[j].clone(),
                    });
                }
                raw_labels.push(cell.to_string());
                continue;
            }
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    line,
                    column: header[j].clone(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                line,
                column: header[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    line,
                    column: header[j].clone(),
                    value: cell.to_string(),
                });
            }
            features.push(T::lit(v));
        }
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(Error::LabelCardinality {
            found: distinct.len(),
            values: distinct.iter().map(|s| s.to_string()).collect(),
        });
    }
    let negative = *distinct.iter().next().expect("two values");
    let labels = raw_labels
        .iter()
        .map(|l| if l == negative { Label::Neg } else { Label::Pos })
        .collect();

    let ds = Dataset::from_flat(name, width - 1, features, labels, None)?;
    ds.require_both_classes()?;
    Ok(ds)
}

/// Maps every feature column affinely onto [0, 1]; constant columns become 0.
pub fn normalize_minmax<T: Scalar>(d: &Dataset<T>) -> Dataset<T> {
    let dim = d.dim();
    let mut lo = vec![T::infinity(); dim];
    let mut hi = vec![T::neg_infinity(); dim];
    for row in d.rows() {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let features = d
        .features
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let j = k % dim;
            let span = hi[j] - lo[j];
            if span > T::zero() {
                (v - lo[j]) / span
            } else {
                T::zero()
            }
        })
        .collect();
    Dataset {
        features,
        ..d.clone()
    }
}

/// Fraction of labels to flip and the seed that picks them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    fraction: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=0.5).contains(&fraction) {
            return Err(Error::InvalidParameter(format!(
                "noise fraction {fraction} outside [0, 0.5]"
            )));
        }
        Ok(Self { fraction, seed })
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of labels flipped on a dataset of `n` samples (round half up).
    pub fn flip_count(&self, n: usize) -> usize {
        ((self.fraction * n as f64) + 0.5).floor() as usize
    }
}

/// Indices whose labels [`inject_label_noise`] negates, sorted.
pub fn noise_indices(n: usize, spec: &NoiseSpec) -> Vec<usize> {
    let k = spec.flip_count(n).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut idx = index::sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

/// Negates exactly `round(fraction * n)` labels chosen by the seeded generator.
///
/// The result may hold a single class on tiny inputs; downstream stages that
/// need both classes check for it.
pub fn inject_label_noise<T: Scalar>(d: &Dataset<T>, spec: &NoiseSpec) -> Dataset<T> {
    let mut out = d.clone();
    for i in noise_indices(d.len(), spec) {
        out.labels[i] = out.labels[i].flipped();
    }
    out
}

/// Stratified train/test index partition, each side sorted ascending.
///
/// The test side receives `round(test_fraction * n)` samples, apportioned
/// between classes by largest remainder and clamped so both sides keep at
/// least one sample of each class.
pub fn split_indices<T: Scalar>(
    d: &Dataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let classes = [Label::Neg, Label::Pos];
    let mut members: Vec<Vec<usize>> = classes
        .iter()
        .map(|&l| (0..d.len()).filter(|&i| d.label(i) == l).collect())
        .collect();
    for (l, m) in classes.iter().zip(&members) {
        if m.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: l.sign(),
                count: m.len(),
                required: 2,
            });
        }
    }

    let n = d.len();
    let total = ((test_fraction * n as f64) + 0.5).floor() as usize;
    let total = total.clamp(2, n - 2);
    let exact: Vec<f64> = members
        .iter()
        .map(|m| total as f64 * m.len() as f64 / n as f64)
        .collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..classes.len()).collect();
    // Largest fractional remainder first; ties go to the lower class index.
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[c] += 1;
        left -= 1;
    }
    for (c, m) in counts.iter_mut().zip(&members) {
        *c = (*c).clamp(1, m.len() - 1);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(n);
    let mut test = Vec::with_capacity(total);
    for (m, &k) in members.iter_mut().zip(&counts) {
        m.shuffle(&mut rng);
        test.extend_from_slice(&m[..k]);
        train.extend_from_slice(&m[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified shuffle split into `(train, test)`.
pub fn split<T: Scalar>(d: &Dataset<T>, test_fraction: f64, seed: u64) -> Result<(Dataset<T>, Dataset<T>)> {
    let (train, test) = split_indices(d, test_fraction, seed)?;
    Ok((d.subset(&train), d.subset(&test)))
}
