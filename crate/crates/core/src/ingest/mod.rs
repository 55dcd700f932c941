//! KDD Cup 99 ingestion: record parsing, the five-class label taxonomy,
//! one-hot / min-max encoding and stratified train/test sampling.

mod label;
mod record;
mod sample;
mod schema;
pub mod synth;

pub use label::{map_label, ClassLabel, ATTACK_LABELS};
pub use record::{parse_records, parse_str, ConnectionRecord, ParseError, RawField, CATEGORICAL_COLUMNS, FEATURE_NAMES};
pub use sample::{allocate_quotas, stratified_indices, stratified_sample};
pub use schema::{encode, fit_schema, ColumnKind, ColumnSpec, EncodedDataset, EncodingSchema};
