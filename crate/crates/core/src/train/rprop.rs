use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resilient backpropagation without weight backtracking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RpropParams {
    pub increase: f64,
    pub decrease: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for RpropParams {
    fn default() -> Self {
        Self {
            increase: 1.2,
            decrease: 0.5,
            initial_step: 0.07,
            max_step: 50.0,
            min_step: 1e-6,
        }
    }
}

impl RpropParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.increase > 1.0
            && self.decrease > 0.0
            && self.decrease < 1.0
            && self.min_step > 0.0
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step;
        if !ok {
            return Err(Error::InvalidConfig(
                "rprop needs increase > 1, 0 < decrease < 1, and min_step <= initial_step <= max_step".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpropState {
    pub step_sizes: Vec<f64>,
    pub prev_gradient: Vec<f64>,
}

impl RpropState {
    pub fn new(dim: usize, params: &RpropParams) -> Self {
        Self {
            step_sizes: vec![params.initial_step; dim],
            prev_gradient: vec![0.0; dim],
        }
    }
}

/// One sign-based update of `weights` from the current gradient.
///
/// When a partial derivative flips sign its step shrinks, the weight is left
/// alone this round and the stored derivative is zeroed.
pub fn rprop_step(gradient: &[f64], state: &mut RpropState, weights: &mut [f64], params: &RpropParams) {
    for (i, &g) in gradient.iter().enumerate() {
        let prev = state.prev_gradient[i];
        let s = prev * g;
        if s > 0.0 {
            state.step_sizes[i] = (state.step_sizes[i] * params.increase).min(params.max_step);
        } else if s < 0.0 {
            state.step_sizes[i] = (state.step_sizes[i] * params.decrease).max(params.min_step);
            state.prev_gradient[i] = 0.0;
            continue;
        }
        if g > 0.0 {
            weights[i] -= state.step_sizes[i];
        } else if g < 0.0 {
            weights[i] += state.step_sizes[i];
        }
        state.prev_gradient[i] = g;
    }
}
