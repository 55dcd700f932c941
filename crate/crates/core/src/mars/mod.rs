//! Multivariate adaptive regression splines.
//!
//! A model is a weighted sum of basis functions, each a product of hinge
//! factors `max(0, ±(x[v] - t))`. [`forward_pass`] grows the basis greedily
//! with mirror pairs of hinges, [`backward_prune`] deletes terms by
//! generalised cross-validation, and [`fit`] runs both.

mod forward;
mod gcv;
mod lsq;
mod prune;

use serde::{Deserialize, Serialize};

use crate::data::Rows;
use crate::error::{Error, Result};

pub use forward::{candidate_knots, forward_pass};
pub use gcv::{count_knots, gcv};
pub use lsq::{basis_matrix, fit_least_squares, residual_sum_of_squares};
pub use prune::backward_prune;

/// Sign of a hinge: `Positive` is `max(0, x - t)`, `Negative` is `max(0, t - x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        match d {
            Direction::Positive => 1,
            Direction::Negative => -1,
        }
    }
}

impl TryFrom<i8> for Direction {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Direction::Positive),
            -1 => Ok(Direction::Negative),
            other => Err(format!("hinge direction must be +1 or -1, got {other}")),
        }
    }
}

/// One truncated-linear factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hinge {
    pub variable: usize,
    pub knot: f64,
    pub direction: Direction,
}

impl Hinge {
    pub fn new(variable: usize, knot: f64, direction: Direction) -> Self {
        Self {
            variable,
            knot,
            direction,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.direction.sign() * (x - self.knot)).max(0.0)
    }
}

/// Product of hinge factors over distinct variables; no factors is the
/// constant function 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BasisFunction {
    pub factors: Vec<Hinge>,
}

impl BasisFunction {
    pub fn constant() -> Self {
        Self::default()
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn uses_variable(&self, variable: usize) -> bool {
        self.factors.iter().any(|h| h.variable == variable)
    }

    /// This basis multiplied by one more hinge.
    pub fn extended(&self, hinge: Hinge) -> Self {
        let mut factors = self.factors.clone();
        factors.push(hinge);
        Self { factors }
    }

    /// Unchecked evaluation; callers guarantee every variable is in range.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.factors.iter().map(|h| h.eval(x[h.variable])).product()
    }
}

/// Evaluates `basis` at `x`.
pub fn eval_basis(basis: &BasisFunction, x: &[f64]) -> Result<f64> {
    if let Some(h) = basis.factors.iter().find(|h| h.variable >= x.len()) {
        return Err(Error::DimensionMismatch {
            expected: h.variable + 1,
            found: x.len(),
        });
    }
    Ok(basis.eval_unchecked(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarsConfig {
    /// Budget of non-constant basis functions.
    pub max_basis_functions: usize,
    /// Minimum number of observations between admissible knots.
    pub min_span: usize,
    pub max_interaction_degree: usize,
    /// Cost per knot in the GCV effective parameter count.
    pub gcv_penalty: f64,
    /// Forward growth stops once a step reduces RSS by less than this
    /// fraction of the current RSS.
    pub forward_tolerance: f64,
}

impl Default for MarsConfig {
    fn default() -> Self {
        Self {
            max_basis_functions: 5,
            min_span: 10,
            max_interaction_degree: 1,
            gcv_penalty: 3.0,
            forward_tolerance: 1e-6,
        }
    }
}

impl MarsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_basis_functions < 1 {
            return Err(Error::InvalidConfig("max_basis_functions must be at least 1".into()));
        }
        if self.min_span < 1 {
            return Err(Error::InvalidConfig("min_span must be at least 1".into()));
        }
        if self.max_interaction_degree < 1 {
            return Err(Error::InvalidConfig("max_interaction_degree must be at least 1".into()));
        }
        if !(self.gcv_penalty >= 0.0) {
            return Err(Error::InvalidConfig("gcv_penalty must be non-negative".into()));
        }
        if !(self.forward_tolerance >= 0.0) {
            return Err(Error::InvalidConfig("forward_tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// A fitted spline model. `basis[0]` is always the constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarsModel {
    pub config: MarsConfig,
    pub input_dim: usize,
    pub basis: Vec<BasisFunction>,
    pub coefficients: Vec<f64>,
    /// Training residual sum of squares.
    pub rss: f64,
    pub gcv: f64,
}

impl MarsModel {
    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `Σ c_i · B_i(x)`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self
            .basis
            .iter()
            .zip(&self.coefficients)
            .map(|(b, c)| c * b.eval_unchecked(x))
            .sum())
    }

    /// `true` (positive) iff the score reaches `threshold`.
    pub fn predict_class(&self, x: &[f64], threshold: f64) -> Result<bool> {
        Ok(self.predict(x)? >= threshold)
    }

    pub fn num_knots(&self) -> usize {
        count_knots(&self.basis)
    }
}

/// Forward pass followed by backward pruning.
pub fn fit(x: Rows<'_>, y: &[f64], config: &MarsConfig) -> Result<MarsModel> {
    let forward = forward_pass(x, y, config)?;
    backward_prune(&forward, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hinge(v: usize, t: f64, d: Direction) -> BasisFunction {
        BasisFunction::constant().extended(Hinge::new(v, t, d))
    }

    #[test]
    fn hinge_evaluation() {
        let b = hinge(0, 2.0, Direction::Positive);
        assert_eq!(eval_basis(&b, &[3.0]).unwrap(), 1.0);
        assert_eq!(eval_basis(&b, &[2.0]).unwrap(), 0.0);
        assert_eq!(eval_basis(&hinge(0, 2.0, Direction::Negative), &[0.5]).unwrap(), 1.5);
        assert_eq!(eval_basis(&BasisFunction::constant(), &[7.0, -1.0]).unwrap(), 1.0);
    }

    #[test]
    fn interaction_is_a_product() {
        let b = hinge(0, 1.0, Direction::Positive).extended(Hinge::new(1, 0.0, Direction::Negative));
        assert_eq!(eval_basis(&b, &[3.0, -2.0]).unwrap(), 4.0);
        assert_eq!(b.degree(), 2);
        assert!(b.uses_variable(1));
    }

    #[test]
    fn out_of_range_variable() {
        let b = hinge(3, 0.0, Direction::Positive);
        assert!(matches!(eval_basis(&b, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    fn toy_model(coefficients: Vec<f64>, basis: Vec<BasisFunction>) -> MarsModel {
        MarsModel {
            config: MarsConfig::default(),
            input_dim: 1,
            basis,
            coefficients,
            rss: 0.0,
            gcv: 0.0,
        }
    }

    #[test]
    fn predictions() {
        let m = toy_model(vec![0.7], vec![BasisFunction::constant()]);
        for x in [-10.0, 0.0, 3.3] {
            assert!(m.predict_class(&[x], 0.5).unwrap());
        }
        let m = toy_model(
            vec![0.0, 1.0],
            vec![BasisFunction::constant(), hinge(0, 3.0, Direction::Positive)],
        );
        assert_eq!(m.predict(&[5.0]).unwrap(), 2.0);
        assert!(matches!(m.predict(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(MarsConfig::default().validate().is_ok());
        let bad = MarsConfig {
            min_span: 0,
            ..MarsConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
