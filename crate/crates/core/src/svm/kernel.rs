use serde::{Deserialize, Serialize};

use crate::data::dot;

/// Kernel function. A missing `gamma` means `1 / dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf {
        #[serde(default)]
        gamma: Option<f64>,
    },
    Polynomial {
        degree: u32,
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        coef0: f64,
    },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Rbf { gamma: None }
    }
}

impl Kernel {
    /// Same kernel with any default `gamma` fixed for inputs of width `dim`.
    pub fn resolve(self, dim: usize) -> Self {
        let fill = |g: Option<f64>| Some(g.unwrap_or(1.0 / dim.max(1) as f64));
        match self {
            Kernel::Linear => Kernel::Linear,
            Kernel::Rbf { gamma } => Kernel::Rbf { gamma: fill(gamma) },
            Kernel::Polynomial { degree, gamma, coef0 } => Kernel::Polynomial {
                degree,
                gamma: fill(gamma),
                coef0,
            },
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let gamma = |g: Option<f64>| g.unwrap_or(1.0 / a.len().max(1) as f64);
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma: g } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma(g) * d2).exp()
            }
            Kernel::Polynomial { degree, gamma: g, coef0 } => (gamma(g) * dot(a, b) + coef0).powi(degree as i32),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let bad_gamma = |g: Option<f64>| g.is_some_and(|g| !(g > 0.0 && g.is_finite()));
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Rbf { gamma } if bad_gamma(gamma) => Err("rbf gamma must be positive".into()),
            Kernel::Polynomial { degree: 0, .. } => Err("polynomial degree must be at least 1".into()),
            Kernel::Polynomial { gamma, .. } if bad_gamma(gamma) => Err("polynomial gamma must be positive".into()),
            _ => Ok(()),
        }
    }
}
