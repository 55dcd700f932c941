use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected 42 comma-separated fields (41 features + label), found {found}")]
    FieldCount { line: usize, found: usize },

    #[error("line {line}: field {field} (`{name}`) is not numeric: `{value}`")]
    NotNumeric {
        line: usize,
        field: usize,
        name: &'static str,
        value: String,
    },

    #[error("line {line}: empty label")]
    EmptyLabel { line: usize },

    #[error("unknown connection label `{0}`")]
    UnknownLabel(String),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot draw {requested} records from a population of {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("{effective_params} effective parameters is too many for {observations} observations")]
    TooComplex {
        effective_params: f64,
        observations: usize,
    },

    #[error("non-finite loss at epoch {epoch}")]
    NonFinite { epoch: usize },

    #[error("search direction is zero")]
    ZeroDirection,

    #[error("not a descent direction (directional derivative {0})")]
    NotDescent(f64),

    #[error("line search found no acceptable step after {0} halvings")]
    LineSearchFailed(usize),

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("SMO did not converge after {iterations} iterations (violating-pair gap {gap:.3e})")]
    NoConvergence { iterations: usize, gap: f64 },
}
