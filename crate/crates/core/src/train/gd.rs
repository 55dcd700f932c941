use serde::{Deserialize, Serialize};

use super::{Algorithm, Objective, Point, Progress};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GdParams {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Adaptive variant: rate multiplier after a successful epoch.
    pub rate_increase: f64,
    /// Adaptive variant: rate multiplier after a rejected epoch.
    pub rate_decrease: f64,
}

impl Default for GdParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            rate_increase: 1.05,
            rate_decrease: 0.7,
        }
    }
}

impl GdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("learning rate must be positive and momentum in [0, 1)".into()));
        }
        if !(self.rate_increase >= 1.0) || !(self.rate_decrease > 0.0 && self.rate_decrease < 1.0) {
            return Err(Error::InvalidConfig("adaptive rate factors must satisfy inc >= 1 and 0 < dec < 1".into()));
        }
        Ok(())
    }
}

/// Plain, momentum, and adaptive-rate gradient descent.
#[derive(Debug, Clone)]
pub struct GdState {
    variant: Algorithm,
    rate: f64,
    velocity: Vec<f64>,
}

impl GdState {
    pub fn new(variant: Algorithm, dim: usize, params: &GdParams) -> Self {
        Self {
            variant,
            rate: params.learning_rate,
            velocity: vec![0.0; dim],
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn epoch(&mut self, obj: &dyn Objective, pt: &mut Point, params: &GdParams) -> Result<Progress> {
        match self.variant {
            Algorithm::Gdm => {
                for (v, g) in self.velocity.iter_mut().zip(&pt.gradient) {
                    *v = params.momentum * *v - self.rate * g;
                }
                let w: Vec<f64> = pt.params.iter().zip(&self.velocity).map(|(w, v)| w + v).collect();
                *pt = Point::evaluate(obj, w)?;
            }
            Algorithm::Gda => {
                let w: Vec<f64> = pt.params.iter().zip(&pt.gradient).map(|(w, g)| w - self.rate * g).collect();
                let next = Point::evaluate(obj, w)?;
                if next.loss < pt.loss {
                    *pt = next;
                    self.rate *= params.rate_increase;
                } else {
                    self.rate *= params.rate_decrease;
                }
            }
            _ => {
                let w: Vec<f64> = pt.params.iter().zip(&pt.gradient).map(|(w, g)| w - self.rate * g).collect();
                *pt = Point::evaluate(obj, w)?;
            }
        }
        Ok(Progress::Continue)
    }
}
