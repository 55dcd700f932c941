//! Soft-margin binary support vector machine trained by SMO.

mod cache;
mod kernel;
mod smo;

use serde::{Deserialize, Serialize};

use crate::data::Rows;
use crate::error::{Error, Result};

pub use kernel::Kernel;
pub use smo::{dual_objective, SmoOutcome, SmoSolver};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub cache_mb: usize,
    /// SMO iteration cap; unset means `max(100 n, 10^7)`.
    pub max_iterations: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel: Kernel::default(),
            c: 1.0,
            tol: 1e-3,
            cache_mb: 100,
            max_iterations: None,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig("svm C must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("svm tolerance must be positive".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidConfig("svm max_iterations must be at least 1".into()));
        }
        self.kernel.validate().map_err(Error::InvalidConfig)
    }
}

/// Trained classifier. Only support vectors (`α > 0`) are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub dim: usize,
    /// Row-major support vectors.
    pub support_vectors: Vec<f64>,
    /// `αᵢ yᵢ` for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn fit(x: Rows<'_>, positive: &[bool], params: &SvmParams) -> Result<Self> {
        Self::fit_with_outcome(x, positive, params).map(|(m, _)| m)
    }

    pub fn fit_with_outcome(x: Rows<'_>, positive: &[bool], params: &SvmParams) -> Result<(Self, SmoOutcome)> {
        params.validate()?;
        if x.len() != positive.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: positive.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::Empty("svm training set"));
        }
        if positive.iter().all(|&p| p) || positive.iter().all(|&p| !p) {
            return Err(Error::SingleClass);
        }
        let kernel = params.kernel.resolve(x.dim());
        let mut solver = SmoSolver::new(kernel, x, positive, params.c, params.tol, params.cache_mb << 20);
        if let Some(cap) = params.max_iterations {
            solver = solver.with_max_iterations(cap);
        }
        let outcome = solver.solve()?;
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for (i, &a) in outcome.alpha.iter().enumerate() {
            if a > 0.0 {
                support_vectors.extend_from_slice(x.row(i));
                coefficients.push(if positive[i] { a } else { -a });
            }
        }
        let model = Self {
            kernel,
            c: params.c,
            dim: x.dim(),
            support_vectors,
            coefficients,
            bias: -outcome.rho,
        };
        Ok((model, outcome))
    }

    pub fn num_support_vectors(&self) -> usize {
        self.coefficients.len()
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let sum: f64 = self
            .support_vectors
            .chunks_exact(self.dim.max(1))
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum();
        Ok(sum + self.bias)
    }

    /// `true` for the positive class; a zero score counts as positive.
    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.decision_value(x)? >= 0.0)
    }
}
