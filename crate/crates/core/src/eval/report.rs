//! Report tables as aligned text or CSV.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::confusion::{metrics, ConfusionMatrix, Metrics};
use crate::error::Result;
use crate::ingest::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassResult {
    pub class: ClassLabel,
    /// Class-versus-rest accuracy in percent.
    pub binary_accuracy: f64,
    pub degenerate: bool,
    pub train_seconds: Option<f64>,
    pub test_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub confusion: ConfusionMatrix,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub per_class: Vec<ClassResult>,
    pub train_seconds: f64,
    pub test_seconds: f64,
}

impl EvalReport {
    pub fn new(
        model: String,
        confusion: ConfusionMatrix,
        per_class: Vec<ClassResult>,
        train_seconds: f64,
        test_seconds: f64,
    ) -> Result<Self> {
        Ok(Self {
            metrics: metrics(&confusion)?,
            model,
            confusion,
            per_class,
            train_seconds,
            test_seconds,
        })
    }

    pub fn is_ensemble(&self) -> bool {
        self.per_class.iter().any(|c| c.train_seconds.is_some())
    }
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

fn secs(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

/// Columns are separated by at least two spaces; cells never contain two
/// consecutive spaces, so the layout can be split back into cells.
fn text_table(title: &str, header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, "  {cell:>w$}");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    out.push_str(title);
    out.push('\n');
    line(header, &mut out);
    let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for row in rows {
        line(row, &mut out);
    }
    out
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn strings(cells: &[&str]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

/// Per-class class-versus-rest accuracy.
pub fn binary_accuracy_table(report: &EvalReport, format: Format) -> String {
    let rows: Vec<Vec<String>> = report
        .per_class
        .iter()
        .map(|c| vec![c.class.name().to_string(), format!("{:.2}", c.binary_accuracy)])
        .collect();
    match format {
        Format::Text => text_table(
            &format!("Test performance per class ({})", report.model),
            &strings(&["Class", "Accuracy (%)"]),
            &rows,
        ),
        Format::Csv => csv_table(&["class", "accuracy_percent"], &rows),
    }
}

/// Confusion matrix with recall and precision margins.
pub fn confusion_table(report: &EvalReport, format: Format) -> String {
    let m = &report.metrics;
    let c = &report.confusion;
    match format {
        Format::Text => {
            let mut header = strings(&["Class of Attack"]);
            header.extend(ClassLabel::ALL.iter().map(|l| l.name().to_string()));
            header.push("Recall (%)".into());
            let mut rows: Vec<Vec<String>> = ClassLabel::ALL
                .iter()
                .enumerate()
                .map(|(k, l)| {
                    let mut row = vec![l.name().to_string()];
                    row.extend(c.counts[k].iter().map(u64::to_string));
                    row.push(pct(m.recall[k]));
                    row
                })
                .collect();
            let mut last = vec!["Precision (%)".to_string()];
            last.extend(m.precision.iter().map(|p| pct(*p)));
            last.push(String::new());
            rows.push(last);
            let mut out = text_table(&format!("Confusion matrix ({})", report.model), &header, &rows);
            let _ = writeln!(out);
            let _ = writeln!(out, "Overall accuracy: {:.2}% ({} of {})", m.accuracy, c.trace(), c.total());
            let _ = writeln!(
                out,
                "False positive rate: {}% (Normal records labelled as any attack / all Normal records)",
                pct(m.false_positive_rate)
            );
            let _ = writeln!(
                out,
                "False negative rate: {}% (attack records labelled Normal / all attack records)",
                pct(m.false_negative_rate)
            );
            let _ = writeln!(out, "Other splits of the total error rate give different figures.");
            if report.is_ensemble() {
                let _ = writeln!(out, "Five-way labels are the argmax of the raw binary scores, without calibration.");
            }
            out
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = ClassLabel::ALL
                .iter()
                .enumerate()
                .map(|(k, l)| {
                    let mut row = vec![l.name().to_string()];
                    row.extend(c.counts[k].iter().map(u64::to_string));
                    row.push(pct(m.recall[k]));
                    row.push(pct(m.precision[k]));
                    row
                })
                .collect();
            csv_table(
                &["true_class", "Normal", "Probe", "DoS", "U2Su", "R2L", "recall_percent", "precision_percent"],
                &rows,
            )
        }
    }
}

/// Per-class training time, testing time and accuracy of an ensemble.
pub fn svm_timing_table(report: &EvalReport, format: Format) -> String {
    let rows: Vec<Vec<String>> = report
        .per_class
        .iter()
        .map(|c| {
            vec![
                c.class.name().to_string(),
                secs(c.train_seconds),
                secs(c.test_seconds),
                format!("{:.2}", c.binary_accuracy),
            ]
        })
        .collect();
    match format {
        Format::Text => text_table(
            &format!("Test performance per binary model ({})", report.model),
            &strings(&["Class of Attack", "Training Time (sec)", "Testing Time (sec)", "Accuracy (%)"]),
            &rows,
        ),
        Format::Csv => csv_table(&["class", "train_seconds", "test_seconds", "accuracy_percent"], &rows),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerRow {
    pub trainer: String,
    pub epochs: usize,
    pub final_mse: f64,
    pub converged: bool,
    pub accuracy: f64,
}

/// Epochs and overall accuracy per network training algorithm.
pub fn trainer_table(rows: &[TrainerRow], format: Format) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.trainer.clone(),
                r.epochs.to_string(),
                format!("{:.6}", r.final_mse),
                r.converged.to_string(),
                format!("{:.2}", r.accuracy),
            ]
        })
        .collect();
    match format {
        Format::Text => text_table(
            "Test performance per training function",
            &strings(&["Function", "No of Epochs", "Final MSE", "Goal Met", "Accuracy (%)"]),
            &cells,
        ),
        Format::Csv => csv_table(&["trainer", "epochs", "final_mse", "goal_met", "accuracy_percent"], &cells),
    }
}

/// Class-by-model grid of class-versus-rest accuracies; `None` marks a failed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGrid {
    pub models: Vec<String>,
    /// One column per model, in class order.
    pub columns: Vec<[Option<f64>; 5]>,
}

impl ComparisonGrid {
    pub fn missing_cells(&self) -> usize {
        self.columns.iter().flatten().filter(|c| c.is_none()).count()
    }

    pub fn get(&self, model: &str, class: ClassLabel) -> Option<f64> {
        let j = self.models.iter().position(|m| m == model)?;
        self.columns[j][class.index()]
    }
}

pub fn comparison_table(grid: &ComparisonGrid, format: Format) -> String {
    let rows: Vec<Vec<String>> = ClassLabel::ALL
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let mut row = vec![l.name().to_string()];
            row.extend(grid.columns.iter().map(|col| match (col[k], format) {
                (Some(v), _) => format!("{v:.2}"),
                (None, Format::Text) => "-".to_string(),
                (None, Format::Csv) => String::new(),
            }));
            row
        })
        .collect();
    match format {
        Format::Text => {
            let mut header = strings(&["Class of Attack"]);
            header.extend(grid.models.iter().cloned());
            text_table("Class-versus-rest accuracy (%) per model", &header, &rows)
        }
        Format::Csv => {
            let mut header = vec!["class"];
            header.extend(grid.models.iter().map(String::as_str));
            csv_table(&header, &rows)
        }
    }
}

/// Records per class in each split.
pub fn class_distribution_table(train: &[usize; 5], test: &[usize; 5], format: Format) -> String {
    let rows: Vec<Vec<String>> = ClassLabel::ALL
        .iter()
        .enumerate()
        .map(|(k, l)| vec![l.name().to_string(), l.code().to_string(), train[k].to_string(), test[k].to_string()])
        .collect();
    match format {
        Format::Text => text_table("Class distribution", &strings(&["Class", "Code", "Train", "Test"]), &rows),
        Format::Csv => csv_table(&["class", "code", "train", "test"], &rows),
    }
}
