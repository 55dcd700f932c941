//! One-vs-rest composition of binary learners and evaluation metrics.

mod confusion;
mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ClassLabel, EncodedDataset};
use crate::mars::{self, MarsConfig, MarsModel};
use crate::mlp::MlpModel;
use crate::svm::{SvmModel, SvmParams};

pub use confusion::{confusion, metrics, ConfusionMatrix, Metrics};
pub use report::{
    binary_accuracy_table, class_distribution_table, comparison_table, confusion_table, svm_timing_table,
    trainer_table, ClassResult, ComparisonGrid, EvalReport, Format, TrainerRow,
};

/// MARS regression scores at or above this value count as the positive class.
pub const MARS_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerSpec {
    Mars(MarsConfig),
    Svm(SvmParams),
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Mars(_) => "mars",
            LearnerSpec::Svm(_) => "svm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BinaryModel {
    Mars(MarsModel),
    Svm(SvmModel),
    /// Target class had no positive (or no negative) examples.
    Degenerate { positive: bool },
}

impl BinaryModel {
    /// Real-valued score; larger means more likely positive.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            BinaryModel::Mars(m) => m.predict(x),
            BinaryModel::Svm(m) => m.decision_value(x),
            BinaryModel::Degenerate { positive: true } => Ok(f64::INFINITY),
            BinaryModel::Degenerate { positive: false } => Ok(f64::NEG_INFINITY),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        match self {
            BinaryModel::Mars(m) => m.predict_class(x, MARS_THRESHOLD),
            BinaryModel::Svm(m) => m.predict(x),
            BinaryModel::Degenerate { positive } => Ok(*positive),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, BinaryModel::Degenerate { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrMember {
    pub class: ClassLabel,
    pub model: BinaryModel,
    pub positives: usize,
    pub train_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneVsRestEnsemble {
    pub learner: String,
    pub input_dim: usize,
    /// One member per class, in class order.
    pub members: Vec<OvrMember>,
}

/// Trains one class-versus-rest model per class, concurrently.
pub fn train_ovr(spec: &LearnerSpec, train: &EncodedDataset) -> Result<OneVsRestEnsemble> {
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let members = ClassLabel::ALL
        .par_iter()
        .map(|&class| train_member(spec, train, class))
        .collect::<Result<Vec<_>>>()?;
    Ok(OneVsRestEnsemble {
        learner: spec.name().to_string(),
        input_dim: train.dim(),
        members,
    })
}

fn train_member(spec: &LearnerSpec, train: &EncodedDataset, class: ClassLabel) -> Result<OvrMember> {
    let positive: Vec<bool> = train.labels().iter().map(|&l| l == class).collect();
    let positives = positive.iter().filter(|&&p| p).count();
    let start = Instant::now();
    let model = if positives == 0 || positives == train.len() {
        BinaryModel::Degenerate {
            positive: positives > 0,
        }
    } else {
        match spec {
            LearnerSpec::Mars(cfg) => {
                let y: Vec<f64> = positive.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect();
                BinaryModel::Mars(mars::fit(train.rows(), &y, cfg)?)
            }
            LearnerSpec::Svm(params) => BinaryModel::Svm(SvmModel::fit(train.rows(), &positive, params)?),
        }
    };
    Ok(OvrMember {
        class,
        model,
        positives,
        train_seconds: start.elapsed().as_secs_f64(),
    })
}

impl OneVsRestEnsemble {
    pub fn scores(&self, x: &[f64]) -> Result<[f64; 5]> {
        let mut s = [0.0; 5];
        for (slot, m) in s.iter_mut().zip(&self.members) {
            *slot = m.model.score(x)?;
        }
        Ok(s)
    }
}

/// Class with the largest score; ties go to the lowest class index.
pub fn predict_ovr(e: &OneVsRestEnsemble, x: &[f64]) -> Result<ClassLabel> {
    Ok(argmax_class(&e.scores(x)?))
}

pub fn argmax_class(scores: &[f64; 5]) -> ClassLabel {
    let mut best = 0;
    for k in 1..5 {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    ClassLabel::ALL[best]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryEval {
    pub class: ClassLabel,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    pub test_seconds: f64,
}

/// Positive-versus-rest accuracy in percent.
pub fn evaluate_binary(model: &BinaryModel, test: &EncodedDataset, positive_class: ClassLabel) -> Result<BinaryEval> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let start = Instant::now();
    let hits = (0..test.len())
        .into_par_iter()
        .map(|i| Ok(usize::from(model.predict(test.row(i))? == (test.labels()[i] == positive_class))))
        .collect::<Result<Vec<usize>>>()?;
    let correct = hits.iter().sum();
    Ok(BinaryEval {
        class: positive_class,
        correct,
        total: test.len(),
        accuracy: 100.0 * correct as f64 / test.len() as f64,
        test_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Full report for an ensemble: fused 5-way confusion plus per-member binary results.
pub fn evaluate_ensemble(e: &OneVsRestEnsemble, test: &EncodedDataset) -> Result<EvalReport> {
    if test.dim() != e.input_dim {
        return Err(Error::DimensionMismatch {
            expected: e.input_dim,
            found: test.dim(),
        });
    }
    let start = Instant::now();
    let predicted = (0..test.len())
        .into_par_iter()
        .map(|i| predict_ovr(e, test.row(i)))
        .collect::<Result<Vec<_>>>()?;
    let fused_seconds = start.elapsed().as_secs_f64();
    let matrix = confusion(test.labels(), &predicted)?;
    let mut per_class = Vec::with_capacity(5);
    for m in &e.members {
        let b = evaluate_binary(&m.model, test, m.class)?;
        per_class.push(ClassResult {
            class: m.class,
            binary_accuracy: b.accuracy,
            degenerate: m.model.is_degenerate(),
            train_seconds: Some(m.train_seconds),
            test_seconds: Some(b.test_seconds),
        });
    }
    EvalReport::new(
        e.learner.clone(),
        matrix,
        per_class,
        e.members.iter().map(|m| m.train_seconds).sum(),
        fused_seconds,
    )
}

/// Full report for a direct 5-way network; binary accuracies come from the confusion matrix.
pub fn evaluate_mlp(name: &str, model: &MlpModel, test: &EncodedDataset, train_seconds: f64) -> Result<EvalReport> {
    if test.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            found: test.dim(),
        });
    }
    let start = Instant::now();
    let predicted = (0..test.len())
        .into_par_iter()
        .map(|i| model.predict_class(test.row(i)))
        .collect::<Result<Vec<_>>>()?;
    let test_seconds = start.elapsed().as_secs_f64();
    let matrix = confusion(test.labels(), &predicted)?;
    let per_class = ClassLabel::ALL
        .iter()
        .map(|&class| ClassResult {
            class,
            binary_accuracy: matrix.binary_accuracy(class.index()).unwrap_or(0.0),
            degenerate: false,
            train_seconds: None,
            test_seconds: None,
        })
        .collect();
    EvalReport::new(name.to_string(), matrix, per_class, train_seconds, test_seconds)
}

/// One-hot network targets in class order.
pub fn one_hot(labels: &[ClassLabel]) -> Vec<f64> {
    let mut t = vec![0.0; labels.len() * 5];
    for (i, l) in labels.iter().enumerate() {
        t[i * 5 + l.index()] = 1.0;
    }
    t
}
