//! One-step secant directions and the backtracking line search they use.

use super::Objective;
use crate::data::{dot, norm};
use crate::error::{Error, Result};

pub const ARMIJO_C1: f64 = 1e-4;
pub const MAX_HALVINGS: usize = 40;
/// Minimum `pᵀv / (|p| |v|)` for the secant pair to be trusted.
const CURVATURE_EPS: f64 = 1e-12;

/// Last step `p = w_new - w_old` and gradient change `v = g_new - g_old`.
#[derive(Debug, Clone, Default)]
pub struct OssState {
    pub step: Option<Vec<f64>>,
    pub gradient_change: Option<Vec<f64>>,
}

impl OssState {
    pub fn record(&mut self, step: Vec<f64>, gradient_change: Vec<f64>) {
        self.step = Some(step);
        self.gradient_change = Some(gradient_change);
    }

    pub fn reset(&mut self) {
        self.step = None;
        self.gradient_change = None;
    }

    pub fn has_history(&self) -> bool {
        self.step.is_some()
    }
}

/// `d = -g + A p + B v`: the BFGS direction with the previous inverse
/// Hessian taken as the identity. Without usable history (first epoch or
/// non-positive curvature) this is `-g` and the history is cleared.
pub fn oss_direction(gradient: &[f64], state: &mut OssState) -> Vec<f64> {
    let steepest = || gradient.iter().map(|g| -g).collect::<Vec<_>>();
    let (Some(p), Some(v)) = (&state.step, &state.gradient_change) else {
        return steepest();
    };
    let pv = dot(p, v);
    if !(pv > CURVATURE_EPS * norm(p) * norm(v)) {
        state.reset();
        return steepest();
    }
    let b = dot(p, gradient) / pv;
    let a = -(1.0 + dot(v, v) / pv) * b + dot(v, gradient) / pv;
    gradient
        .iter()
        .zip(p)
        .zip(v)
        .map(|((g, pi), vi)| -g + a * pi + b * vi)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome {
    pub step: f64,
    pub loss: f64,
}

/// Armijo backtracking from a unit step, halving up to [`MAX_HALVINGS`] times.
pub fn line_search(obj: &dyn Objective, w: &[f64], d: &[f64], loss: f64, gradient: &[f64]) -> Result<LineSearchOutcome> {
    let slope = dot(d, gradient);
    if !(slope < 0.0) {
        return Err(Error::NotDescent(slope));
    }
    let mut alpha = 1.0;
    let mut trial = vec![0.0; w.len()];
    for _ in 0..=MAX_HALVINGS {
        for ((t, wi), di) in trial.iter_mut().zip(w).zip(d) {
            *t = wi + alpha * di;
        }
        let f = obj.loss(&trial)?;
        if f <= loss + ARMIJO_C1 * alpha * slope {
            return Ok(LineSearchOutcome { step: alpha, loss: f });
        }
        alpha *= 0.5;
    }
    Err(Error::LineSearchFailed(MAX_HALVINGS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_history_is_steepest_descent() {
        let mut st = OssState::default();
        assert_eq!(oss_direction(&[1.0, -2.0], &mut st), vec![-1.0, 2.0]);
    }

    #[test]
    fn negative_curvature_resets() {
        let mut st = OssState::default();
        st.record(vec![1.0, 0.0], vec![-1.0, 0.0]);
        assert_eq!(oss_direction(&[1.0, 1.0], &mut st), vec![-1.0, -1.0]);
        assert!(!st.has_history());
    }

    #[test]
    fn secant_condition() {
        // With G = I the updated inverse Hessian H satisfies H v = p.
        // Taking g = v gives d = -H v = -p.
        let p = vec![0.3, -1.2, 0.5];
        let v = vec![1.0, -0.4, 0.9];
        let mut st = OssState::default();
        st.record(p.clone(), v.clone());
        let d = oss_direction(&v, &mut st);
        for (di, pi) in d.iter().zip(&p) {
            assert!((di + pi).abs() < 1e-12);
        }
    }
}
