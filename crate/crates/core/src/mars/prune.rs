use nalgebra::DMatrix;

use super::gcv::{count_knots, gcv};
use super::lsq::{basis_matrix, solve};
use super::{BasisFunction, MarsModel};
use crate::data::Rows;
use crate::error::{Error, Result};

struct Subset {
    members: Vec<usize>,
    coefficients: Vec<f64>,
    rss: f64,
    gcv: f64,
}

fn evaluate(full: &DMatrix<f64>, members: &[usize], basis: &[BasisFunction], y: &[f64], penalty: f64) -> Result<Subset> {
    let b = full.select_columns(members);
    let coefficients = solve(b.clone(), y)?;
    let fitted = &b * nalgebra::DVector::from_column_slice(&coefficients);
    let rss = fitted.iter().zip(y).map(|(f, t)| (t - f).powi(2)).sum::<f64>();
    let chosen: Vec<BasisFunction> = members.iter().map(|&m| basis[m].clone()).collect();
    let gcv = gcv(rss, y.len(), members.len(), count_knots(&chosen), penalty).unwrap_or(f64::INFINITY);
    Ok(Subset {
        members: members.to_vec(),
        coefficients,
        rss,
        gcv,
    })
}

/// Backward deletion by GCV.
///
/// Each step removes the non-constant basis function whose deletion gives
/// the lowest GCV (ties to the lower index); the returned model is the
/// subset with the smallest GCV seen along the whole deletion sequence,
/// preferring the smaller model on equal scores.
pub fn backward_prune(model: &MarsModel, x: Rows<'_>, y: &[f64]) -> Result<MarsModel> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let penalty = model.config.gcv_penalty;
    let full = basis_matrix(&model.basis, x)?;
    let mut current: Vec<usize> = (0..model.basis.len()).collect();
    let mut best = evaluate(&full, &current, &model.basis, y, penalty)?;

    while current.len() > 1 {
        let mut step: Option<Subset> = None;
        for drop in 1..current.len() {
            let trial: Vec<usize> = current.iter().enumerate().filter(|&(k, _)| k != drop).map(|(_, &m)| m).collect();
            let s = evaluate(&full, &trial, &model.basis, y, penalty)?;
            if step.as_ref().is_none_or(|b| s.gcv < b.gcv) {
                step = Some(s);
            }
        }
        let step = step.expect("at least one removable term");
        current = step.members.clone();
        if step.gcv <= best.gcv {
            best = step;
        }
    }

    Ok(MarsModel {
        config: model.config,
        input_dim: model.input_dim,
        basis: best.members.iter().map(|&m| model.basis[m].clone()).collect(),
        coefficients: best.coefficients,
        rss: best.rss,
        gcv: best.gcv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mars::{forward_pass, Direction, Hinge, MarsConfig};

    fn line_data() -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..40).map(|i| f64::from(i) / 4.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 0.5 * v).collect();
        (x, y)
    }

    #[test]
    fn zero_weight_term_removed() {
        let (x, y) = line_data();
        let rows = Rows::new(&x, 1).unwrap();
        let c = BasisFunction::constant();
        let basis = vec![
            c.clone(),
            c.extended(Hinge::new(0, 0.0, Direction::Positive)),
            // Zero on every observation.
            c.extended(Hinge::new(0, 50.0, Direction::Positive)),
        ];
        let model = MarsModel {
            config: MarsConfig::default(),
            input_dim: 1,
            basis,
            coefficients: vec![1.0, 0.5, 0.0],
            rss: 0.0,
            gcv: gcv(0.0, 40, 3, 2, 3.0).unwrap(),
        };
        let pruned = backward_prune(&model, rows, &y).unwrap();
        assert_eq!(pruned.basis.len(), 2);
        assert!(pruned.basis.iter().all(|b| b.factors.iter().all(|h| h.knot != 50.0)));
        assert!(pruned.gcv <= model.gcv + 1e-20);
        assert!(pruned.rss < 1e-20);
    }

    #[test]
    fn constant_only_unchanged() {
        let (x, y) = line_data();
        let rows = Rows::new(&x, 1).unwrap();
        let cfg = MarsConfig {
            max_basis_functions: 1,
            min_span: 1,
            forward_tolerance: f64::INFINITY,
            ..MarsConfig::default()
        };
        let model = forward_pass(rows, &y, &cfg).unwrap();
        assert_eq!(model.basis.len(), 1);
        let pruned = backward_prune(&model, rows, &y).unwrap();
        assert_eq!(pruned.basis, model.basis);
        assert!((pruned.coefficients[0] - model.coefficients[0]).abs() < 1e-12);
    }
}
