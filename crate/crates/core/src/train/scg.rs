//! Scaled conjugate gradient: conjugate directions with a Levenberg-style
//! scale in place of a line search.

use serde::{Deserialize, Serialize};

use super::{Objective, Point, Progress};
use crate::data::{dot, norm};
use crate::error::{Error, Result};

const LAMBDA_MIN: f64 = 1e-15;
const LAMBDA_MAX: f64 = 1e100;
/// Below this many ulps of the loss, loss differences are measured from gradients.
const RESOLUTION_ULPS: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScgParams {
    /// Finite-difference scale for Hessian-vector products.
    pub sigma: f64,
    /// Initial scale parameter.
    pub lambda: f64,
}

impl Default for ScgParams {
    fn default() -> Self {
        Self { sigma: 1e-4, lambda: 1e-6 }
    }
}

impl ScgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma <= 1e-3) || !(self.lambda > 0.0 && self.lambda <= 1e-3) {
            return Err(Error::InvalidConfig("scg needs 0 < sigma <= 1e-3 and 0 < lambda <= 1e-3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ScgState {
    pub direction: Option<Vec<f64>>,
    pub lambda: f64,
    /// `pᵀ s` from the last Hessian-vector product, reused after a rejected step.
    curvature: f64,
    success: bool,
    /// Accepted steps since the last restart.
    since_restart: usize,
}

impl ScgState {
    pub fn new(params: &ScgParams) -> Self {
        Self {
            direction: None,
            lambda: params.lambda,
            curvature: 0.0,
            success: true,
            since_restart: 0,
        }
    }
}

/// Finite-difference product `(E'(w + σ' p) - E'(w)) / σ' + λ p` with
/// `σ' = σ / |p|`.
pub fn scg_hessian_vector(obj: &dyn Objective, w: &[f64], p: &[f64], sigma: f64, lambda: f64) -> Result<Vec<f64>> {
    let (_, g) = obj.loss_and_gradient(w)?;
    hessian_vector_with(obj, w, &g, p, sigma, lambda)
}

fn hessian_vector_with(obj: &dyn Objective, w: &[f64], g: &[f64], p: &[f64], sigma: f64, lambda: f64) -> Result<Vec<f64>> {
    let pn = norm(p);
    if pn == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let h = sigma / pn;
    let shifted: Vec<f64> = w.iter().zip(p).map(|(wi, pi)| wi + h * pi).collect();
    let (_, g_shift) = obj.loss_and_gradient(&shifted)?;
    Ok(g_shift
        .iter()
        .zip(g)
        .zip(p)
        .map(|((a, b), pi)| (a - b) / h + lambda * pi)
        .collect())
}

/// One iteration. A rejected step leaves `pt` unchanged and raises the scale.
pub fn scg_train_epoch(state: &mut ScgState, obj: &dyn Objective, pt: &mut Point, params: &ScgParams) -> Result<Progress> {
    let n = pt.params.len();
    let r: Vec<f64> = pt.gradient.iter().map(|g| -g).collect();
    if r.iter().all(|&v| v == 0.0) {
        return Ok(Progress::Stalled);
    }
    let p = state.direction.get_or_insert_with(|| r.clone());
    let mut mu = dot(p, &r);
    if mu <= 0.0 {
        *p = r.clone();
        mu = dot(p, &r);
        state.success = true;
        state.since_restart = 0;
    }
    let p2 = dot(p, p);
    if state.success {
        let s = hessian_vector_with(obj, &pt.params, &pt.gradient, p, params.sigma, 0.0)?;
        state.curvature = dot(p, &s);
    }
    let mut delta = state.curvature + state.lambda * p2;
    if delta <= 0.0 {
        // Force a positive definite local model.
        let lambda_bar = 2.0 * (state.lambda - delta / p2);
        delta = -delta + state.lambda * p2;
        state.lambda = lambda_bar.min(LAMBDA_MAX);
    }
    let alpha = mu / delta;
    let w_new: Vec<f64> = pt.params.iter().zip(p.iter()).map(|(w, pi)| w + alpha * pi).collect();
    let predicted = 0.5 * alpha * mu;
    let (reduction, evaluated) = if predicted < RESOLUTION_ULPS * f64::EPSILON * pt.loss.abs() {
        // Trapezoid rule on the gradients; exact on quadratics and immune to
        // cancellation between two nearly equal losses.
        let next = Point::evaluate(obj, w_new.clone())?;
        let red = -0.5 * alpha * (dot(&pt.gradient, p) + dot(&next.gradient, p));
        (if next.loss.is_finite() { red } else { f64::NAN }, Some(next))
    } else {
        (pt.loss - obj.loss(&w_new)?, None)
    };
    let comparison = if reduction.is_finite() {
        2.0 * delta * reduction / (mu * mu)
    } else {
        f64::NEG_INFINITY
    };
    if comparison >= 0.0 {
        let next = match evaluated {
            Some(next) => next,
            None => Point::evaluate(obj, w_new)?,
        };
        let r_new: Vec<f64> = next.gradient.iter().map(|g| -g).collect();
        state.since_restart += 1;
        if state.since_restart >= n {
            *p = r_new.clone();
            state.since_restart = 0;
        } else {
            let beta = (dot(&r_new, &r_new) - dot(&r_new, &r)) / mu;
            for (pi, ri) in p.iter_mut().zip(&r_new) {
                *pi = ri + beta * *pi;
            }
        }
        *pt = next;
        state.success = true;
        if comparison >= 0.75 {
            state.lambda = (state.lambda * 0.5).max(LAMBDA_MIN);
        }
    } else {
        state.success = false;
    }
    if comparison < 0.25 {
        state.lambda = (state.lambda * 4.0).min(LAMBDA_MAX);
    }
    Ok(Progress::Continue)
}
