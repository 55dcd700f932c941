use std::collections::HashSet;

use super::BasisFunction;
use crate::error::{Error, Result};

/// Generalised cross-validation score
/// `(rss / n) / (1 - (num_basis + d * num_knots) / n)^2`.
pub fn gcv(rss: f64, n: usize, num_basis: usize, num_knots: usize, penalty: f64) -> Result<f64> {
    let effective = num_basis as f64 + penalty * num_knots as f64;
    let n_f = n as f64;
    if effective >= n_f {
        return Err(Error::TooComplex {
            effective_params: effective,
            observations: n,
        });
    }
    let shrink = 1.0 - effective / n_f;
    Ok((rss / n_f) / (shrink * shrink))
}

/// Number of distinct `(variable, knot)` locations used by `basis`; a mirror
/// pair shares one knot.
pub fn count_knots(basis: &[BasisFunction]) -> usize {
    basis
        .iter()
        .flat_map(|b| b.factors.iter().map(|h| (h.variable, h.knot.to_bits())))
        .collect::<HashSet<_>>()
        .len()
}
