use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ClassLabel;

/// Counts indexed `[true][predicted]` in class order Normal..R2L.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 5]; 5],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 5]; 5]) -> Self {
        Self { counts }
    }

    pub fn add(&mut self, truth: ClassLabel, predicted: ClassLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..5).map(|k| self.counts[k][k]).sum()
    }

    pub fn row_total(&self, k: usize) -> u64 {
        self.counts[k].iter().sum()
    }

    pub fn column_total(&self, k: usize) -> u64 {
        self.counts.iter().map(|r| r[k]).sum()
    }

    /// Accuracy of the implied class-`k`-versus-rest decision, in percent.
    pub fn binary_accuracy(&self, k: usize) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let tp = self.counts[k][k];
        let fp = self.column_total(k) - tp;
        let fn_ = self.row_total(k) - tp;
        let tn = total - tp - fp - fn_;
        Some(percent(tp + tn, total))
    }
}

fn percent(num: u64, den: u64) -> f64 {
    100.0 * num as f64 / den as f64
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| percent(num, den))
}

pub fn confusion(truth: &[ClassLabel], predicted: &[ClassLabel]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    let mut m = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        m.add(t, p);
    }
    Ok(m)
}

/// Rates in percent. A rate whose denominator is zero is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub recall: [Option<f64>; 5],
    pub precision: [Option<f64>; 5],
    /// Normal records assigned to any attack class, over all Normal records.
    pub false_positive_rate: Option<f64>,
    /// Attack records assigned to Normal, over all attack records.
    pub false_negative_rate: Option<f64>,
}

pub fn metrics(c: &ConfusionMatrix) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix"));
    }
    let normal = ClassLabel::Normal.index();
    let normal_row = c.row_total(normal);
    let attacks = total - normal_row;
    Ok(Metrics {
        accuracy: percent(c.trace(), total),
        recall: std::array::from_fn(|k| ratio(c.counts[k][k], c.row_total(k))),
        precision: std::array::from_fn(|k| ratio(c.counts[k][k], c.column_total(k))),
        false_positive_rate: ratio(normal_row - c.counts[normal][normal], normal_row),
        false_negative_rate: ratio(c.column_total(normal) - c.counts[normal][normal], attacks),
    })
}
