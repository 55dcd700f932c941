use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::label::{map_label, ClassLabel};
use super::record::{ConnectionRecord, RawField, FEATURE_NAMES};
use crate::data::Rows;
use crate::error::{Error, Result};

/// How one raw column is encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    /// Min-max scaled to `[0, 1]` using training extrema. A constant column
    /// (`min == max`) encodes as 0.
    Numeric { min: f64, max: f64, constant: bool },
    /// One-hot over the sorted training vocabulary; unseen values encode as
    /// an all-zero block.
    Categorical { vocabulary: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn width(&self) -> usize {
        match &self.kind {
            ColumnKind::Numeric { .. } => 1,
            ColumnKind::Categorical { vocabulary } => vocabulary.len(),
        }
    }
}

/// Frozen per-column encoding fitted on training records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSchema {
    pub columns: Vec<ColumnSpec>,
}

impl EncodingSchema {
    /// Width of an encoded row.
    pub fn width(&self) -> usize {
        self.columns.iter().map(ColumnSpec::width).sum()
    }

    /// Names of the encoded columns, e.g. `src_bytes` or `service=http`.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for col in &self.columns {
            match &col.kind {
                ColumnKind::Numeric { .. } => names.push(col.name.clone()),
                ColumnKind::Categorical { vocabulary } => {
                    names.extend(vocabulary.iter().map(|v| format!("{}={}", col.name, v)))
                }
            }
        }
        names
    }

    fn encode_into(&self, record: &ConnectionRecord, out: &mut Vec<f64>) {
        for (column, spec) in self.columns.iter().enumerate() {
            match (&spec.kind, record.feature(column)) {
                (ColumnKind::Numeric { min, max, constant }, RawField::Numeric(v)) => {
                    out.push(if *constant { 0.0 } else { (v - min) / (max - min) });
                }
                (ColumnKind::Categorical { vocabulary }, RawField::Categorical(v)) => {
                    let hit = vocabulary.binary_search_by(|w| w.as_str().cmp(v)).ok();
                    out.extend((0..vocabulary.len()).map(|k| if Some(k) == hit { 1.0 } else { 0.0 }));
                }
                _ => unreachable!("schema column kinds follow the fixed KDD layout"),
            }
        }
    }
}

/// Fits vocabularies and numeric ranges on training records only.
pub fn fit_schema(train: &[ConnectionRecord]) -> Result<EncodingSchema> {
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let columns = (0..FEATURE_NAMES.len())
        .map(|column| {
            let kind = match train[0].feature(column) {
                RawField::Numeric(_) => {
                    let (min, max) = train.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        match r.feature(column) {
                            RawField::Numeric(v) => (lo.min(v), hi.max(v)),
                            RawField::Categorical(_) => unreachable!(),
                        }
                    });
                    ColumnKind::Numeric {
                        min,
                        max,
                        constant: min == max,
                    }
                }
                RawField::Categorical(_) => {
                    let values: BTreeSet<&str> = train
                        .iter()
                        .map(|r| match r.feature(column) {
                            RawField::Categorical(v) => v,
                            RawField::Numeric(_) => unreachable!(),
                        })
                        .collect();
                    ColumnKind::Categorical {
                        vocabulary: values.into_iter().map(str::to_string).collect(),
                    }
                }
            };
            ColumnSpec {
                name: FEATURE_NAMES[column].to_string(),
                kind,
            }
        })
        .collect();
    Ok(EncodingSchema { columns })
}

/// Encodes records under a fitted schema. Test values outside the training
/// range are not clamped.
pub fn encode(records: &[ConnectionRecord], schema: &EncodingSchema) -> Result<EncodedDataset> {
    let labels = records
        .iter()
        .map(|r| map_label(r.label()))
        .collect::<Result<Vec<_>>>()?;
    let width = schema.width();
    let rows: Vec<Vec<f64>> = records
        .par_iter()
        .map(|r| {
            let mut row = Vec::with_capacity(width);
            schema.encode_into(r, &mut row);
            row
        })
        .collect();
    let values = rows.concat();
    EncodedDataset::new(width, values, labels)
}

/// Dense numeric rows with their class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    dim: usize,
    values: Vec<f64>,
    labels: Vec<ClassLabel>,
}

impl EncodedDataset {
    pub fn new(dim: usize, values: Vec<f64>, labels: Vec<ClassLabel>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("encoded width must be at least 1".into()));
        }
        if values.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * labels.len(),
                found: values.len(),
            });
        }
        Ok(Self { dim, values, labels })
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

    pub fn rows(&self) -> Rows<'_> {
        Rows::new(&self.values, self.dim).expect("shape checked at construction")
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn class_counts(&self) -> [usize; 5] {
        let mut counts = [0; 5];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            values,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}
