use std::collections::HashMap;
use std::io::BufRead;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Column names of the 41 connection features, in file order.
pub const FEATURE_NAMES: [&str; 41] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// Feature positions holding symbolic values (protocol_type, service, flag).
pub const CATEGORICAL_COLUMNS: [usize; 3] = [1, 2, 3];

const FIELDS_PER_LINE: usize = FEATURE_NAMES.len() + 1;

/// One connection: 38 numeric features, 3 symbolic ones and the raw label.
///
/// Symbolic values and labels are interned, so a parsed file shares one
/// allocation per distinct string.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionRecord {
    numeric: Vec<f64>,
    categorical: [Arc<str>; 3],
    label: Arc<str>,
}

/// A single raw feature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawField<'a> {
    Numeric(f64),
    Categorical(&'a str),
}

impl ConnectionRecord {
    /// Builds a record from 41 feature strings and a label.
    pub fn from_fields<S: AsRef<str>>(fields: &[S], label: &str) -> Result<Self> {
        let mut interner = Interner::default();
        build_record(fields.iter().map(|s| s.as_ref()), label, 0, &mut interner)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Value of feature column `column` (0..41).
    pub fn feature(&self, column: usize) -> RawField<'_> {
        match CATEGORICAL_COLUMNS.iter().position(|&c| c == column) {
            Some(k) => RawField::Categorical(&self.categorical[k]),
            None => {
                let offset = CATEGORICAL_COLUMNS.iter().filter(|&&c| c < column).count();
                RawField::Numeric(self.numeric[column - offset])
            }
        }
    }

    /// The 38 numeric features in column order.
    pub fn numeric(&self) -> &[f64] {
        &self.numeric
    }

    /// protocol_type, service and flag.
    pub fn categorical(&self) -> [&str; 3] {
        [&self.categorical[0], &self.categorical[1], &self.categorical[2]]
    }
}

#[derive(Default)]
struct Interner(HashMap<String, Arc<str>>);

impl Interner {
    fn intern(&mut self, s: &str) -> Arc<str> {
        if let Some(a) = self.0.get(s) {
            return a.clone();
        }
        let a: Arc<str> = Arc::from(s);
        self.0.insert(s.to_string(), a.clone());
        a
    }
}

fn build_record<'s>(
    fields: impl Iterator<Item = &'s str>,
    label: &str,
    line: usize,
    interner: &mut Interner,
) -> Result<ConnectionRecord> {
    let mut numeric = Vec::with_capacity(FEATURE_NAMES.len() - CATEGORICAL_COLUMNS.len());
    let mut categorical: [Option<Arc<str>>; 3] = [None, None, None];
    let mut seen = 0;
    for (column, raw) in fields.enumerate() {
        seen += 1;
        if seen > FEATURE_NAMES.len() {
            break;
        }
        let raw = raw.trim();
        if let Some(k) = CATEGORICAL_COLUMNS.iter().position(|&c| c == column) {
            categorical[k] = Some(interner.intern(raw));
        } else {
            let value: f64 = raw.parse().map_err(|_| Error::NotNumeric {
                line,
                field: column + 1,
                name: FEATURE_NAMES[column],
                value: raw.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NotNumeric {
                    line,
                    field: column + 1,
                    name: FEATURE_NAMES[column],
                    value: raw.to_string(),
                });
            }
            numeric.push(value);
        }
    }
    if seen != FEATURE_NAMES.len() {
        return Err(Error::FieldCount {
            line,
            found: seen + 1,
        });
    }
    let label = label.trim();
    let label = label.strip_suffix('.').unwrap_or(label);
    if label.is_empty() {
        return Err(Error::EmptyLabel { line });
    }
    let [a, b, c] = categorical;
    Ok(ConnectionRecord {
        numeric,
        categorical: [a.unwrap(), b.unwrap(), c.unwrap()],
        label: interner.intern(label),
    })
}

/// Parses comma-separated KDD lines (41 features + label, LF or CRLF).
///
/// Blank lines are skipped. Line numbers in errors are one-based.
pub fn parse_records<R: BufRead>(reader: R) -> Result<Vec<ConnectionRecord>, ParseError> {
    let mut interner = Interner::default();
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(ParseError::Io)?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_line(line, idx + 1, &mut interner).map_err(ParseError::Record)?);
    }
    Ok(records)
}

/// [`parse_records`] over an in-memory string.
pub fn parse_str(text: &str) -> Result<Vec<ConnectionRecord>> {
    let mut interner = Interner::default();
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, l)| parse_line(l.trim_end_matches('\r'), idx + 1, &mut interner))
        .collect()
}

fn parse_line(line: &str, number: usize, interner: &mut Interner) -> Result<ConnectionRecord> {
    let found = line.split(',').count();
    if found != FIELDS_PER_LINE {
        return Err(Error::FieldCount { line: number, found });
    }
    let (features, label) = line.rsplit_once(',').expect("field count checked");
    build_record(features.split(','), label, number, interner)
}

/// Failure while reading records from a stream.
#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Record(#[from] Error),
}
