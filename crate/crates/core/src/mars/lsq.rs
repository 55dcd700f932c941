use nalgebra::{DMatrix, DVector};

use super::BasisFunction;
use crate::data::Rows;
use crate::error::{Error, Result};

/// Relative singular-value cutoff of the least-squares solve.
const RCOND: f64 = 1e-10;

/// `n × m` matrix of basis evaluations.
pub fn basis_matrix(basis: &[BasisFunction], x: Rows<'_>) -> Result<DMatrix<f64>> {
    if let Some(v) = basis
        .iter()
        .flat_map(|b| b.factors.iter().map(|h| h.variable))
        .find(|&v| v >= x.dim())
    {
        return Err(Error::DimensionMismatch {
            expected: v + 1,
            found: x.dim(),
        });
    }
    Ok(DMatrix::from_fn(x.len(), basis.len(), |i, j| basis[j].eval_unchecked(x.row(i))))
}

/// Minimum-norm least-squares coefficients for `y ≈ B c`.
///
/// Solved through the SVD of `B`; singular values below `1e-10` times the
/// largest are treated as zero, so rank-deficient or all-zero columns get
/// zero weight instead of blowing up.
pub fn fit_least_squares(basis: &[BasisFunction], x: Rows<'_>, y: &[f64]) -> Result<Vec<f64>> {
    if basis.is_empty() {
        return Err(Error::Empty("basis"));
    }
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let b = basis_matrix(basis, x)?;
    solve(b, y)
}

pub(crate) fn solve(b: DMatrix<f64>, y: &[f64]) -> Result<Vec<f64>> {
    let m = b.ncols();
    if b.nrows() == 0 {
        return Ok(vec![0.0; m]);
    }
    let svd = b.svd(true, true);
    let largest = svd.singular_values.max();
    if largest == 0.0 {
        return Ok(vec![0.0; m]);
    }
    let target = DVector::from_column_slice(y);
    let c = svd
        .solve(&target, largest * RCOND)
        .expect("both singular vector sets were requested");
    Ok(c.iter().copied().collect())
}

pub fn residual_sum_of_squares(basis: &[BasisFunction], coefficients: &[f64], x: Rows<'_>, y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(row, &t)| {
            let fitted: f64 = basis.iter().zip(coefficients).map(|(b, c)| c * b.eval_unchecked(row)).sum();
            (t - fitted).powi(2)
        })
        .sum()
}
