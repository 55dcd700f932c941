//! The on-disk dataset bundle written by `prep`: the fitted encoding schema,
//! encoded train/test splits as CSV and a manifest with class counts and
//! SHA-256 digests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use knotwork_core::ingest::ClassLabel;
use knotwork_core::{EncodedDataset, EncodingSchema};
use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
pub const SCHEMA: &str = "schema.json";
pub const TRAIN: &str = "train.csv";
pub const TEST: &str = "test.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub file_name: String,
    pub sha256: String,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class: ClassLabel,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_sha256: String,
    pub source: SourceInfo,
    pub sample_total: usize,
    pub train: usize,
    pub test: usize,
    pub classes: Vec<ClassCount>,
    pub encoded_width: usize,
    /// SHA-256 of each bundle file.
    pub files: BTreeMap<String, String>,
    /// SHA-256 over the file digests, in name order.
    pub content_sha256: String,
}

impl Manifest {
    pub fn train_counts(&self) -> [usize; 5] {
        let mut c = [0; 5];
        for cc in &self.classes {
            c[cc.class.index()] = cc.train;
        }
        c
    }

    pub fn test_counts(&self) -> [usize; 5] {
        let mut c = [0; 5];
        for cc in &self.classes {
            c[cc.class.index()] = cc.test;
        }
        c
    }
}

pub fn content_digest(files: &BTreeMap<String, String>) -> String {
    let mut s = String::new();
    for (name, digest) in files {
        let _ = writeln!(s, "{digest}  {name}");
    }
    sha256_hex(s.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Encoded rows as CSV: one column per encoded feature, then the class code.
pub fn dataset_csv(data: &EncodedDataset, feature_names: &[String]) -> String {
    let mut out = String::with_capacity(data.len() * data.dim() * 4);
    for name in feature_names {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("class\n");
    for i in 0..data.len() {
        for v in data.row(i) {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", data.labels()[i].code());
    }
    out
}

pub fn parse_dataset_csv(text: &str, width: usize, origin: &Path) -> CliResult<EncodedDataset> {
    let bad = |line: usize, what: &str| CliError::Input(format!("{}: line {line}: {what}", origin.display()));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    if header.split(',').count() != width + 1 {
        return Err(bad(1, &format!("expected {} columns", width + 1)));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        for _ in 0..width {
            let f = fields.next().ok_or_else(|| bad(i + 2, "too few columns"))?;
            values.push(f.parse::<f64>().map_err(|_| bad(i + 2, &format!("`{f}` is not a number")))?);
        }
        let code = fields.next().ok_or_else(|| bad(i + 2, "missing class"))?;
        let label = code
            .parse::<u8>()
            .ok()
            .and_then(ClassLabel::from_code)
            .ok_or_else(|| bad(i + 2, &format!("`{code}` is not a class code")))?;
        if fields.next().is_some() {
            return Err(bad(i + 2, "too many columns"));
        }
        labels.push(label);
    }
    Ok(EncodedDataset::new(width, values, labels)?)
}

/// A prepared dataset read back from disk.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub schema: EncodingSchema,
    pub train: EncodedDataset,
    pub test: EncodedDataset,
}

impl Bundle {
    pub fn schema_sha256(&self) -> &str {
        &self.manifest.files[SCHEMA]
    }

    /// Reads and verifies every file against the manifest digests.
    pub fn load(dir: &Path) -> CliResult<Self> {
        let manifest_path = dir.join(MANIFEST);
        let manifest: Manifest = serde_json::from_slice(&read_file(&manifest_path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", manifest_path.display())))?;
        let read_checked = |name: &str| -> CliResult<String> {
            let path = dir.join(name);
            let bytes = read_file(&path)?;
            let expected = manifest
                .files
                .get(name)
                .ok_or_else(|| CliError::Input(format!("{}: no digest for {name}", manifest_path.display())))?;
            if &sha256_hex(&bytes) != expected {
                return Err(CliError::Input(format!("{}: digest does not match the manifest", path.display())));
            }
            String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
        };
        let schema_text = read_checked(SCHEMA)?;
        let train_text = read_checked(TRAIN)?;
        let test_text = read_checked(TEST)?;
        let schema: EncodingSchema =
            serde_json::from_str(&schema_text).map_err(|e| CliError::Input(format!("{SCHEMA}: {e}")))?;
        let width = schema.width();
        let train = parse_dataset_csv(&train_text, width, &dir.join(TRAIN))?;
        let test = parse_dataset_csv(&test_text, width, &dir.join(TEST))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            schema,
            train,
            test,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let values = vec![0.1, 1.0 / 3.0, 0.0, 1.0, 2.5e-17, 0.999_999_999_999];
        let data = EncodedDataset::new(3, values, vec![ClassLabel::DoS, ClassLabel::R2L]).unwrap();
        let names: Vec<String> = ["a", "b", "service=http"].map(String::from).to_vec();
        let text = dataset_csv(&data, &names);
        assert!(text.starts_with("a,b,service=http,class\n"));
        let back = parse_dataset_csv(&text, 3, Path::new("t.csv")).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn malformed_csv_reports_line() {
        let err = parse_dataset_csv("a,class\n0.5,1\nx,1\n", 1, Path::new("t.csv")).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(parse_dataset_csv("a,class\n0.5,9\n", 1, Path::new("t.csv")).is_err());
        assert!(parse_dataset_csv("a,b,class\n", 1, Path::new("t.csv")).is_err());
    }

    #[test]
    fn content_digest_depends_on_every_file() {
        let mut f = BTreeMap::new();
        f.insert("a".to_string(), "00".to_string());
        let d1 = content_digest(&f);
        f.insert("b".to_string(), "11".to_string());
        assert_ne!(d1, content_digest(&f));
    }
}
