//! Batch optimizers for differentiable objectives.
//!
//! Every trainer sees an [`Objective`] through loss and gradient evaluations
//! only, so the same code drives the network and the toy problems in tests.

mod gd;
mod oss;
mod rprop;
mod scg;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{dot, Rows};
use crate::error::{Error, Result};
use crate::mlp::{MlpModel, MlpObjective};

pub use gd::{GdParams, GdState};
pub use oss::{line_search, oss_direction, LineSearchOutcome, OssState, ARMIJO_C1, MAX_HALVINGS};
pub use rprop::{rprop_step, RpropParams, RpropState};
pub use scg::{scg_hessian_vector, scg_train_epoch, ScgParams, ScgState};

/// A smooth function of a flat parameter vector.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn loss(&self, params: &[f64]) -> Result<f64>;
    fn loss_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// Current iterate with its loss and gradient.
#[derive(Debug, Clone)]
pub struct Point {
    pub params: Vec<f64>,
    pub loss: f64,
    pub gradient: Vec<f64>,
}

impl Point {
    pub fn evaluate(obj: &dyn Objective, params: Vec<f64>) -> Result<Self> {
        let (loss, gradient) = obj.loss_and_gradient(&params)?;
        Ok(Self { params, loss, gradient })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gd,
    Gdm,
    Gda,
    Rprop,
    Scg,
    Oss,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Gd,
        Algorithm::Gdm,
        Algorithm::Gda,
        Algorithm::Rprop,
        Algorithm::Scg,
        Algorithm::Oss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gd => "gd",
            Algorithm::Gdm => "gdm",
            Algorithm::Gda => "gda",
            Algorithm::Rprop => "rprop",
            Algorithm::Scg => "scg",
            Algorithm::Oss => "oss",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub max_epochs: usize,
    pub mse_goal: f64,
    pub gd: GdParams,
    pub rprop: RpropParams,
    pub scg: ScgParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Rprop,
            max_epochs: 1000,
            mse_goal: 0.001,
            gd: GdParams::default(),
            rprop: RpropParams::default(),
            scg: ScgParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mse_goal.is_nan() {
            return Err(Error::InvalidConfig("mse_goal must be a number".into()));
        }
        self.gd.validate()?;
        self.rprop.validate()?;
        self.scg.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GoalReached,
    MaxEpochs,
    /// Gradient vanished or no descent step could be found.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub algorithm: Algorithm,
    pub epochs_run: usize,
    pub initial_mse: f64,
    pub final_mse: f64,
    /// Loss after each epoch.
    pub mse_trace: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub wall_time_seconds: f64,
}

/// Whether another epoch can make progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    Continue,
    Stalled,
}

enum Engine {
    Gd(GdState),
    Rprop(RpropState),
    Scg(ScgState),
    Oss(OssState),
}

/// Runs the configured optimizer from `initial` until the loss reaches the
/// goal, the epoch budget is spent, or no progress is possible.
pub fn train(obj: &dyn Objective, initial: Vec<f64>, cfg: &TrainConfig) -> Result<(Vec<f64>, TrainReport)> {
    cfg.validate()?;
    if initial.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            found: initial.len(),
        });
    }
    let start = Instant::now();
    let mut pt = Point::evaluate(obj, initial)?;
    if !pt.loss.is_finite() {
        return Err(Error::NonFinite { epoch: 0 });
    }
    let initial_mse = pt.loss;
    let mut engine = match cfg.algorithm {
        Algorithm::Gd | Algorithm::Gdm | Algorithm::Gda => Engine::Gd(GdState::new(cfg.algorithm, obj.dim(), &cfg.gd)),
        Algorithm::Rprop => Engine::Rprop(RpropState::new(obj.dim(), &cfg.rprop)),
        Algorithm::Scg => Engine::Scg(ScgState::new(&cfg.scg)),
        Algorithm::Oss => Engine::Oss(OssState::default()),
    };
    let mut trace = Vec::with_capacity(cfg.max_epochs.min(100_000));
    let mut stop = StopReason::MaxEpochs;
    if pt.loss <= cfg.mse_goal {
        stop = StopReason::GoalReached;
    }
    while stop == StopReason::MaxEpochs && trace.len() < cfg.max_epochs {
        let epoch = trace.len() + 1;
        let progress = match &mut engine {
            Engine::Gd(s) => s.epoch(obj, &mut pt, &cfg.gd)?,
            Engine::Rprop(s) => {
                rprop_step(&pt.gradient, s, &mut pt.params, &cfg.rprop);
                let (loss, gradient) = obj.loss_and_gradient(&pt.params)?;
                pt.loss = loss;
                pt.gradient = gradient;
                Progress::Continue
            }
            Engine::Scg(s) => scg_train_epoch(s, obj, &mut pt, &cfg.scg)?,
            Engine::Oss(s) => oss_epoch(s, obj, &mut pt)?,
        };
        if !pt.loss.is_finite() || pt.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { epoch });
        }
        trace.push(pt.loss);
        if pt.loss <= cfg.mse_goal {
            stop = StopReason::GoalReached;
        } else if let Progress::Stalled = progress {
            stop = StopReason::Stalled;
        }
    }
    let report = TrainReport {
        algorithm: cfg.algorithm,
        epochs_run: trace.len(),
        initial_mse,
        final_mse: pt.loss,
        mse_trace: trace,
        converged: stop == StopReason::GoalReached,
        stop_reason: stop,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((pt.params, report))
}

fn oss_epoch(state: &mut OssState, obj: &dyn Objective, pt: &mut Point) -> Result<Progress> {
    if pt.gradient.iter().all(|&g| g == 0.0) {
        return Ok(Progress::Stalled);
    }
    let mut d = oss_direction(&pt.gradient, state);
    if dot(&d, &pt.gradient) >= 0.0 {
        state.reset();
        d = pt.gradient.iter().map(|g| -g).collect();
    }
    let outcome = match line_search(obj, &pt.params, &d, pt.loss, &pt.gradient) {
        Ok(o) => o,
        Err(Error::LineSearchFailed(_)) if state.has_history() => {
            state.reset();
            d = pt.gradient.iter().map(|g| -g).collect();
            match line_search(obj, &pt.params, &d, pt.loss, &pt.gradient) {
                Ok(o) => o,
                Err(Error::LineSearchFailed(_)) => return Ok(Progress::Stalled),
                Err(e) => return Err(e),
            }
        }
        Err(Error::LineSearchFailed(_)) => return Ok(Progress::Stalled),
        Err(e) => return Err(e),
    };
    let step: Vec<f64> = d.iter().map(|di| outcome.step * di).collect();
    let params: Vec<f64> = pt.params.iter().zip(&step).map(|(w, s)| w + s).collect();
    let next = Point::evaluate(obj, params)?;
    let change: Vec<f64> = next.gradient.iter().zip(&pt.gradient).map(|(a, b)| a - b).collect();
    state.record(step, change);
    *pt = next;
    Ok(Progress::Continue)
}

/// Trains a copy of `model` on the batch `(x, y)`.
pub fn train_mlp(model: &MlpModel, x: Rows<'_>, y: Rows<'_>, cfg: &TrainConfig) -> Result<(MlpModel, TrainReport)> {
    let obj = MlpObjective { model, x, y };
    let (params, report) = train(&obj, model.params().to_vec(), cfg)?;
    let mut trained = model.clone();
    trained.set_params(params)?;
    Ok((trained, report))
}
