//! The four pipeline stages plus synthetic data generation.
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! bundle/    manifest.json schema.json train.csv test.csv class_distribution.{txt,csv}
//! models/    <model>.json
//! reports/   <model>.train.json <model>.eval.json <model>.confusion.{txt,csv}
//!            <model>.per_class.{txt,csv} <model>.timing.{txt,csv}
//!            compare.{json,txt,csv} trainers.{txt,csv}
//! ```
//!
//! `<model>` is `mars`, `svm` or `mlp-<trainer>`.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use knotwork_core::eval::{
    binary_accuracy_table, class_distribution_table, comparison_table, confusion_table, evaluate_ensemble,
    evaluate_mlp, one_hot, svm_timing_table, train_ovr, trainer_table, ComparisonGrid, EvalReport, Format,
    TrainerRow,
};
use knotwork_core::ingest::{
    encode, fit_schema, map_label, parse_records, stratified_indices, synth, ClassLabel, ConnectionRecord,
    ParseError,
};
use knotwork_core::mars::MarsModel;
use knotwork_core::eval::BinaryModel;
use knotwork_core::train::train_mlp;
use knotwork_core::{Algorithm, MlpModel, OneVsRestEnsemble, Rows, TrainReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{self, content_digest, read_file, write_file, Bundle, ClassCount, Manifest, SourceInfo};
use crate::config::{sha256_hex, Entry, RunConfig};
use crate::error::{CliError, CliResult};

pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf() }
    }

    pub fn bundle(&self) -> PathBuf {
        self.root.join("bundle")
    }

    pub fn model(&self, entry: Entry) -> PathBuf {
        self.root.join("models").join(format!("{}.json", entry.file_stem()))
    }

    pub fn report(&self, name: &str) -> PathBuf {
        self.root.join("reports").join(name)
    }
}

/// Config digest and seed, stamped on every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Self {
            config_sha256: cfg.digest(),
            seed: cfg.seed,
        }
    }

    fn stamp(&self, table: &str) -> String {
        format!("# config_sha256={} seed={}\n{table}", self.config_sha256, self.seed)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_tables(layout: &Layout, stem: &str, prov: &Provenance, render: impl Fn(Format) -> String) -> CliResult<()> {
    write_file(&layout.report(&format!("{stem}.txt")), prov.stamp(&render(Format::Text)).as_bytes())?;
    write_file(&layout.report(&format!("{stem}.csv")), prov.stamp(&render(Format::Csv)).as_bytes())
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

// ---------------------------------------------------------------- prep

pub fn prep(cfg: &RunConfig) -> CliResult<Manifest> {
    let path = cfg
        .dataset
        .as_deref()
        .ok_or_else(|| CliError::Config("no dataset given (set `dataset` in the config file)".into()))?;
    with_pool(cfg.jobs, || prep_from(cfg, path))?
}

fn prep_from(cfg: &RunConfig, path: &Path) -> CliResult<Manifest> {
    let bytes = read_file(path)?;
    let records = parse_records(BufReader::new(bytes.as_slice())).map_err(|e| match e {
        ParseError::Io(io) => CliError::io(path, io),
        ParseError::Record(core) => CliError::Input(format!("{}: {core}", path.display())),
    })?;
    let labels = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            map_label(r.label()).map_err(|e| CliError::Input(format!("{}: line {}: {e}", path.display(), i + 1)))
        })
        .collect::<CliResult<Vec<ClassLabel>>>()?;
    let (train_idx, test_idx) = stratified_indices(&labels, cfg.total, cfg.test, cfg.seed)?;
    let pick = |idx: &[usize]| -> Vec<ConnectionRecord> { idx.iter().map(|&i| records[i].clone()).collect() };
    let train_records = pick(&train_idx);
    let schema = fit_schema(&train_records)?;
    let train = encode(&train_records, &schema)?;
    let test = encode(&pick(&test_idx), &schema)?;

    let names = schema.feature_names();
    let mut schema_text = serde_json::to_string_pretty(&schema).expect("schema serializes");
    schema_text.push('\n');
    let contents = [
        (bundle::SCHEMA, schema_text),
        (bundle::TRAIN, bundle::dataset_csv(&train, &names)),
        (bundle::TEST, bundle::dataset_csv(&test, &names)),
    ];
    let layout = Layout::new(&cfg.out_dir);
    let dir = layout.bundle();
    let mut files = BTreeMap::new();
    for (name, text) in &contents {
        write_file(&dir.join(name), text.as_bytes())?;
        files.insert(name.to_string(), sha256_hex(text.as_bytes()));
    }

    let (train_counts, test_counts) = (train.class_counts(), test.class_counts());
    let manifest = Manifest {
        seed: cfg.seed,
        config_sha256: cfg.digest(),
        source: SourceInfo {
            file_name: path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
            sha256: sha256_hex(&bytes),
            records: records.len(),
        },
        sample_total: cfg.total,
        train: train.len(),
        test: test.len(),
        classes: ClassLabel::ALL
            .iter()
            .map(|&class| ClassCount {
                class,
                train: train_counts[class.index()],
                test: test_counts[class.index()],
            })
            .collect(),
        encoded_width: schema.width(),
        content_sha256: content_digest(&files),
        files,
    };
    write_json(&dir.join(bundle::MANIFEST), &manifest)?;
    let prov = Provenance::of(cfg);
    for (format, ext) in [(Format::Text, "txt"), (Format::Csv, "csv")] {
        let table = class_distribution_table(&train_counts, &test_counts, format);
        write_file(&dir.join(format!("class_distribution.{ext}")), prov.stamp(&table).as_bytes())?;
    }
    Ok(manifest)
}

// ---------------------------------------------------------------- train

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Ensemble(OneVsRestEnsemble),
    Mlp(MlpModel),
}

/// A trained model as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    #[serde(flatten)]
    pub provenance: Provenance,
    /// Digest of the bundle schema the model was trained against.
    pub schema_sha256: String,
    pub train_seconds: f64,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        serde_json::from_slice(&read_file(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub class: ClassLabel,
    pub positives: usize,
    pub degenerate: bool,
    /// Non-constant basis functions (MARS) or support vectors (SVM).
    pub size: usize,
    pub train_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrainDetail {
    Mlp { training: TrainReport },
    Ensemble { members: Vec<MemberSummary> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub model: String,
    #[serde(flatten)]
    pub provenance: Provenance,
    #[serde(flatten)]
    pub detail: TrainDetail,
}

fn member_size(m: &BinaryModel) -> usize {
    match m {
        BinaryModel::Mars(MarsModel { basis, .. }) => basis.len() - 1,
        BinaryModel::Svm(s) => s.num_support_vectors(),
        BinaryModel::Degenerate { .. } => 0,
    }
}

fn fit(cfg: &RunConfig, entry: Entry, bundle: &Bundle) -> CliResult<(ModelFile, TrainSummary)> {
    let provenance = Provenance::of(cfg);
    let (model, train_seconds, detail) = match entry {
        Entry::Mlp(algorithm) => {
            let (model, report) = fit_mlp(cfg, algorithm, bundle)?;
            let secs = report.wall_time_seconds;
            (TrainedModel::Mlp(model), secs, TrainDetail::Mlp { training: report })
        }
        Entry::Mars | Entry::Svm => {
            let spec = cfg.learner(entry).expect("ensemble entry");
            let e = train_ovr(&spec, &bundle.train)?;
            let members = e
                .members
                .iter()
                .map(|m| MemberSummary {
                    class: m.class,
                    positives: m.positives,
                    degenerate: m.model.is_degenerate(),
                    size: member_size(&m.model),
                    train_seconds: m.train_seconds,
                })
                .collect();
            let secs = e.members.iter().map(|m| m.train_seconds).sum();
            (TrainedModel::Ensemble(e), secs, TrainDetail::Ensemble { members })
        }
    };
    let file = ModelFile {
        name: entry.file_stem(),
        provenance: provenance.clone(),
        schema_sha256: bundle.schema_sha256().to_string(),
        train_seconds,
        model,
    };
    let summary = TrainSummary {
        model: entry.file_stem(),
        provenance,
        detail,
    };
    Ok((file, summary))
}

fn fit_mlp(cfg: &RunConfig, algorithm: Algorithm, bundle: &Bundle) -> CliResult<(MlpModel, TrainReport)> {
    let mut sizes = vec![bundle.train.dim()];
    sizes.extend(&cfg.mlp.hidden_layers);
    sizes.push(ClassLabel::ALL.len());
    let model = MlpModel::init(&sizes, cfg.seed)?;
    let targets = one_hot(bundle.train.labels());
    let y = Rows::new(&targets, ClassLabel::ALL.len())?;
    Ok(train_mlp(&model, bundle.train.rows(), y, &cfg.train_config(algorithm))?)
}

fn write_trained(layout: &Layout, entry: Entry, file: &ModelFile, summary: &TrainSummary) -> CliResult<PathBuf> {
    let path = layout.model(entry);
    write_json(&path, file)?;
    write_json(&layout.report(&format!("{}.train.json", entry.file_stem())), summary)?;
    Ok(path)
}

/// Trains the configured model; returns the model file path and the summary.
pub fn train(cfg: &RunConfig) -> CliResult<(PathBuf, TrainSummary)> {
    let layout = Layout::new(&cfg.out_dir);
    let bundle = Bundle::load(&layout.bundle())?;
    let entry = cfg.entry();
    let (file, summary) = with_pool(cfg.jobs, || fit(cfg, entry, &bundle))??;
    let path = write_trained(&layout, entry, &file, &summary)?;
    Ok((path, summary))
}

// ---------------------------------------------------------------- eval

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFile {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub schema_sha256: String,
    pub report: EvalReport,
}

fn evaluate(file: &ModelFile, bundle: &Bundle) -> CliResult<EvalReport> {
    if file.schema_sha256 != bundle.schema_sha256() {
        return Err(CliError::Config(format!(
            "model `{}` was trained on a bundle with schema {}, but {} has schema {}",
            file.name,
            file.schema_sha256,
            bundle.dir.display(),
            bundle.schema_sha256()
        )));
    }
    Ok(match &file.model {
        TrainedModel::Ensemble(e) => evaluate_ensemble(e, &bundle.test)?,
        TrainedModel::Mlp(m) => evaluate_mlp(&file.name, m, &bundle.test, file.train_seconds)?,
    })
}

fn write_eval(layout: &Layout, cfg: &RunConfig, bundle: &Bundle, report: &EvalReport) -> CliResult<()> {
    let prov = Provenance::of(cfg);
    let stem = &report.model;
    write_json(
        &layout.report(&format!("{stem}.eval.json")),
        &EvalFile {
            provenance: prov.clone(),
            schema_sha256: bundle.schema_sha256().to_string(),
            report: report.clone(),
        },
    )?;
    write_tables(layout, &format!("{stem}.confusion"), &prov, |f| confusion_table(report, f))?;
    write_tables(layout, &format!("{stem}.per_class"), &prov, |f| binary_accuracy_table(report, f))?;
    if report.is_ensemble() {
        write_tables(layout, &format!("{stem}.timing"), &prov, |f| svm_timing_table(report, f))?;
    }
    Ok(())
}

/// Evaluates a model file (by default the configured model's) on the bundle's test split.
pub fn eval(cfg: &RunConfig, model_path: Option<&Path>) -> CliResult<EvalReport> {
    let layout = Layout::new(&cfg.out_dir);
    let bundle = Bundle::load(&layout.bundle())?;
    let path = model_path.map_or_else(|| layout.model(cfg.entry()), Path::to_path_buf);
    let file = ModelFile::load(&path)?;
    let report = with_pool(cfg.jobs, || evaluate(&file, &bundle))??;
    write_eval(&layout, cfg, &bundle, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub model: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareFile {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub grid: ComparisonGrid,
    pub failures: Vec<Failure>,
}

fn trainer_label(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Gd => "Gradient descent",
        Algorithm::Gdm => "Gradient descent with momentum",
        Algorithm::Gda => "Adaptive learning rate descent",
        Algorithm::Rprop => "Resilient backpropagation",
        Algorithm::Scg => "Scaled conjugate gradient",
        Algorithm::Oss => "One-step secant",
    }
}

/// Trains and evaluates every configured model on one shared split. Failed
/// models leave empty cells and turn into [`CliError::MissingCells`] once all
/// reports are written.
pub fn compare(cfg: &RunConfig) -> CliResult<CompareFile> {
    let entries = cfg.compare_entries()?;
    let layout = Layout::new(&cfg.out_dir);
    let bundle = Bundle::load(&layout.bundle())?;
    let outcomes: Vec<CliResult<(ModelFile, TrainSummary, EvalReport)>> = with_pool(cfg.jobs, || {
        entries
            .par_iter()
            .map(|&entry| {
                let (file, summary) = fit(cfg, entry, &bundle)?;
                let report = evaluate(&file, &bundle)?;
                Ok((file, summary, report))
            })
            .collect()
    })?;

    let prov = Provenance::of(cfg);
    let mut grid = ComparisonGrid {
        models: entries.iter().map(|e| e.column().to_string()).collect(),
        columns: Vec::with_capacity(entries.len()),
    };
    let mut failures = Vec::new();
    let mut trainer_rows = Vec::new();
    for (&entry, outcome) in entries.iter().zip(outcomes) {
        match outcome {
            Ok((file, summary, report)) => {
                write_trained(&layout, entry, &file, &summary)?;
                write_eval(&layout, cfg, &bundle, &report)?;
                let mut column = [None; 5];
                for c in &report.per_class {
                    column[c.class.index()] = Some(c.binary_accuracy);
                }
                grid.columns.push(column);
                if let (Entry::Mlp(a), TrainDetail::Mlp { training }) = (entry, &summary.detail) {
                    trainer_rows.push(TrainerRow {
                        trainer: trainer_label(a).to_string(),
                        epochs: training.epochs_run,
                        final_mse: training.final_mse,
                        converged: training.converged,
                        accuracy: report.metrics.accuracy,
                    });
                }
            }
            Err(e) => {
                eprintln!("{entry}: {e}");
                grid.columns.push([None; 5]);
                failures.push(Failure {
                    model: entry.file_stem(),
                    error: e.to_string(),
                });
            }
        }
    }
    if !trainer_rows.is_empty() {
        write_tables(&layout, "trainers", &prov, |f| trainer_table(&trainer_rows, f))?;
    }
    write_tables(&layout, "compare", &prov, |f| comparison_table(&grid, f))?;
    let out = CompareFile {
        provenance: prov,
        grid,
        failures,
    };
    write_json(&layout.report("compare.json"), &out)?;
    if !out.failures.is_empty() {
        return Err(CliError::MissingCells {
            missing: out.grid.missing_cells(),
            failed: out.failures.iter().map(|f| f.model.clone()).collect(),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------- synth

/// Writes a synthetic file with the 10% file's label mix scaled by `scale`.
pub fn synth(path: &Path, scale: f64, seed: u64) -> CliResult<usize> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(CliError::Config(format!("scale must be positive, got {scale}")));
    }
    let profile = synth::ten_percent_profile(scale);
    let text = synth::generate(&profile, seed);
    write_file(path, text.as_bytes())?;
    Ok(profile.iter().map(|(_, n)| n).sum())
}
