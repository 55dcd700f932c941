//! Intrusion-detection workbench: MARS, feed-forward networks with batch
//! trainers (gradient descent variants, RPROP, SCG, OSS), and SMO-trained
//! support vector machines, evaluated one-vs-rest on KDD Cup 99 connection
//! records.
//!
//! The crate is organised bottom-up:
//!
//! * [`ingest`] parses, labels, encodes and samples connection records.
//! * [`mars`] fits multivariate adaptive regression splines.
//! * [`mlp`] evaluates a multilayer perceptron and its exact MSE gradient.
//! * [`train`] holds the batch optimisers that drive [`mlp`].
//! * [`svm`] solves the soft-margin dual with sequential minimal optimisation.
//! * [`eval`] composes binary learners one-vs-rest and computes the metrics
//!   and report tables.

pub mod data;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod mars;
pub mod mlp;
pub mod svm;
pub mod train;

pub use data::Rows;
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, EvalReport, OneVsRestEnsemble};
pub use ingest::{ClassLabel, ConnectionRecord, EncodedDataset, EncodingSchema};
pub use mars::{MarsConfig, MarsModel};
pub use mlp::MlpModel;
pub use svm::{Kernel, SvmModel, SvmParams};
pub use train::{Algorithm, TrainConfig, TrainReport};
