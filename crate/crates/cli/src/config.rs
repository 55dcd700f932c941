//! Run configuration, read from a TOML file and patched by command-line flags.
//!
//! ```toml
//! dataset = "data/kddcup.data_10_percent"
//! total = 11982
//! test = 6890
//! seed = 1
//! out_dir = "runs/default"
//! jobs = 0              # 0: one thread per core
//! model = "mlp"         # mars | mlp | svm
//!
//! [mars]
//! max_basis_functions = 5
//! min_span = 10
//!
//! [mlp]
//! hidden_layers = [20, 30]
//! [mlp.train]
//! algorithm = "rprop"
//! max_epochs = 1000
//! mse_goal = 0.001
//!
//! [svm]
//! c = 1.0
//! # max_iterations = 10000000
//! kernel = { type = "rbf" }
//!
//! [compare]
//! models = ["svm", "rprop", "scg", "oss", "mars"]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use knotwork_core::eval::LearnerSpec;
use knotwork_core::{Algorithm, MarsConfig, SvmParams, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mars,
    #[default]
    Mlp,
    Svm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpSection {
    pub hidden_layers: Vec<usize>,
    pub train: TrainConfig,
}

impl Default for MlpSection {
    fn default() -> Self {
        Self {
            hidden_layers: vec![20, 30],
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    /// `svm`, `mars`, or an MLP training algorithm name.
    pub models: Vec<String>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            models: ["svm", "rprop", "scg", "oss", "mars"].map(String::from).to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// KDD Cup 99 file read by `prep`.
    pub dataset: Option<PathBuf>,
    pub total: usize,
    pub test: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub model: ModelKind,
    pub mars: MarsConfig,
    pub mlp: MlpSection,
    pub svm: SvmParams,
    pub compare: CompareSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            total: 11982,
            test: 6890,
            seed: 1,
            out_dir: PathBuf::from("runs/default"),
            jobs: 0,
            model: ModelKind::Mlp,
            mars: MarsConfig::default(),
            mlp: MlpSection::default(),
            svm: SvmParams::default(),
            compare: CompareSection::default(),
        }
    }
}

/// One model of a run: an ensemble learner or a network trainer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    Mars,
    Svm,
    Mlp(Algorithm),
}

impl Entry {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mars" => Some(Entry::Mars),
            "svm" => Some(Entry::Svm),
            _ => Algorithm::parse(s).map(Entry::Mlp),
        }
    }

    /// File stem for models and reports.
    pub fn file_stem(self) -> String {
        match self {
            Entry::Mars => "mars".into(),
            Entry::Svm => "svm".into(),
            Entry::Mlp(a) => format!("mlp-{}", a.name()),
        }
    }

    /// Column heading in the comparison grid.
    pub fn column(self) -> &'static str {
        match self {
            Entry::Mars => "MARS",
            Entry::Svm => "SVM",
            Entry::Mlp(Algorithm::Gd) => "GD",
            Entry::Mlp(Algorithm::Gdm) => "GDM",
            Entry::Mlp(Algorithm::Gda) => "GDA",
            Entry::Mlp(Algorithm::Rprop) => "RP",
            Entry::Mlp(Algorithm::Scg) => "SCG",
            Entry::Mlp(Algorithm::Oss) => "OSS",
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.file_stem())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.test == 0 || self.test >= self.total {
            return Err(CliError::Config(format!(
                "test ({}) must be at least 1 and smaller than total ({})",
                self.test, self.total
            )));
        }
        if self.mlp.hidden_layers.contains(&0) {
            return Err(CliError::Config("hidden layer sizes must be at least 1".into()));
        }
        self.mars.validate()?;
        self.svm.validate()?;
        self.mlp.train.validate()?;
        if self.compare.models.is_empty() {
            return Err(CliError::Config("compare.models is empty".into()));
        }
        self.compare_entries().map(|_| ())
    }

    /// The model selected by `model` (and the configured trainer for MLPs).
    pub fn entry(&self) -> Entry {
        match self.model {
            ModelKind::Mars => Entry::Mars,
            ModelKind::Svm => Entry::Svm,
            ModelKind::Mlp => Entry::Mlp(self.mlp.train.algorithm),
        }
    }

    pub fn compare_entries(&self) -> CliResult<Vec<Entry>> {
        let mut out = Vec::with_capacity(self.compare.models.len());
        for name in &self.compare.models {
            let e = Entry::parse(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown compare model `{name}` (expected svm, mars, gd, gdm, gda, rprop, scg or oss)"
                ))
            })?;
            if out.contains(&e) {
                return Err(CliError::Config(format!("compare model `{name}` listed twice")));
            }
            out.push(e);
        }
        Ok(out)
    }

    pub fn learner(&self, entry: Entry) -> Option<LearnerSpec> {
        match entry {
            Entry::Mars => Some(LearnerSpec::Mars(self.mars)),
            Entry::Svm => Some(LearnerSpec::Svm(self.svm.clone())),
            Entry::Mlp(_) => None,
        }
    }

    pub fn train_config(&self, algorithm: Algorithm) -> TrainConfig {
        TrainConfig {
            algorithm,
            ..self.mlp.train.clone()
        }
    }

    /// SHA-256 over the settings that can change results; the dataset path,
    /// output directory and thread count are left out.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.dataset = None;
        c.out_dir = PathBuf::new();
        c.jobs = 0;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        sha256_hex(&bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}
