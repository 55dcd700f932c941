//! Shared fixtures for the benchmarks in `benches/`.

use knotwork_core::ingest::{encode, fit_schema, map_label, parse_str, stratified_indices, synth, ClassLabel};
use knotwork_core::EncodedDataset;

/// Synthetic KDD-format records at `scale` of the 10% file, sampled and
/// encoded like `knotwork prep`.
pub fn fixture(scale: f64, total: usize, test: usize, seed: u64) -> (EncodedDataset, EncodedDataset) {
    let records = parse_str(&synth::generate(&synth::ten_percent_profile(scale), seed)).expect("synthetic records parse");
    let labels: Vec<ClassLabel> = records.iter().map(|r| map_label(r.label()).expect("known label")).collect();
    let (train_idx, test_idx) = stratified_indices(&labels, total, test, seed).expect("sample fits");
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    let train = pick(&train_idx);
    let schema = fit_schema(&train).expect("non-empty");
    (encode(&train, &schema).unwrap(), encode(&pick(&test_idx), &schema).unwrap())
}

/// `1.0` where the label is `class`, else `0.0`.
pub fn indicator(data: &EncodedDataset, class: ClassLabel) -> Vec<f64> {
    data.labels().iter().map(|&l| f64::from(u8::from(l == class))).collect()
}
