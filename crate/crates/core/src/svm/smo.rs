//! Sequential minimal optimization with maximal-violating-pair selection.

use super::cache::KernelCache;
use super::Kernel;
use crate::data::Rows;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoOutcome {
    pub alpha: Vec<f64>,
    /// Decision offset; the decision value is `Σ αᵢ yᵢ K(xᵢ, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Final maximal violation `m(α) - M(α)`.
    pub gap: f64,
    pub objective: f64,
    /// Dual objective after every iteration, when requested.
    pub objective_trace: Vec<f64>,
}

pub struct SmoSolver<'a> {
    y: Vec<f64>,
    c: f64,
    tol: f64,
    max_iter: usize,
    cache: KernelCache<'a>,
    diag: Vec<f64>,
    record_trace: bool,
}

impl<'a> SmoSolver<'a> {
    pub fn new(kernel: Kernel, x: Rows<'a>, positive: &[bool], c: f64, tol: f64, cache_bytes: usize) -> Self {
        let n = x.len();
        Self {
            y: positive.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect(),
            c,
            tol,
            max_iter: (100 * n).max(10_000_000),
            diag: (0..n).map(|i| kernel.eval(x.row(i), x.row(i))).collect(),
            cache: KernelCache::new(kernel, x, cache_bytes),
            record_trace: false,
        }
    }

    pub fn with_max_iterations(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn recording_objective(mut self) -> Self {
        self.record_trace = true;
        self
    }

    fn is_upper(&self, a: f64) -> bool {
        a >= self.c
    }

    fn in_up(&self, t: usize, a: f64) -> bool {
        (self.y[t] > 0.0 && a < self.c) || (self.y[t] < 0.0 && a > 0.0)
    }

    fn in_low(&self, t: usize, a: f64) -> bool {
        (self.y[t] > 0.0 && a > 0.0) || (self.y[t] < 0.0 && a < self.c)
    }

    /// Most violating pair `(i, j)` and the gap `m - M`.
    fn select(&self, alpha: &[f64], grad: &[f64]) -> Option<(usize, usize, f64)> {
        let mut i = None;
        let mut g_max = f64::NEG_INFINITY;
        let mut j = None;
        let mut g_min = f64::INFINITY;
        for t in 0..alpha.len() {
            let v = -self.y[t] * grad[t];
            if self.in_up(t, alpha[t]) && v > g_max {
                g_max = v;
                i = Some(t);
            }
            if self.in_low(t, alpha[t]) && v < g_min {
                g_min = v;
                j = Some(t);
            }
        }
        Some((i?, j?, g_max - g_min))
    }

    pub fn solve(mut self) -> Result<SmoOutcome> {
        let n = self.y.len();
        if n == 0 {
            return Err(Error::Empty("svm training set"));
        }
        let c = self.c;
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let mut trace = Vec::new();
        let mut iterations = 0;
        let gap = loop {
            let Some((i, j, gap)) = self.select(&alpha, &grad) else {
                break 0.0;
            };
            if gap <= self.tol {
                break gap;
            }
            if iterations >= self.max_iter {
                return Err(Error::NoConvergence { iterations, gap });
            }
            iterations += 1;
            let ki = self.cache.row(i);
            let kj = self.cache.row(j);
            let (yi, yj) = (self.y[i], self.y[j]);
            let qij = yi * yj * ki[j];
            let (old_i, old_j) = (alpha[i], alpha[j]);
            let (mut ai, mut aj) = (old_i, old_j);
            if yi != yj {
                let quad = (self.diag[i] + self.diag[j] + 2.0 * qij).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = ai - aj;
                ai += delta;
                aj += delta;
                if diff > 0.0 {
                    if aj < 0.0 {
                        aj = 0.0;
                        ai = diff;
                    }
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = -diff;
                }
                if diff > 0.0 {
                    if ai > c {
                        ai = c;
                        aj = c - diff;
                    }
                } else if aj > c {
                    aj = c;
                    ai = c + diff;
                }
            } else {
                let quad = (self.diag[i] + self.diag[j] - 2.0 * qij).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = ai + aj;
                ai -= delta;
                aj += delta;
                if sum > c {
                    if ai > c {
                        ai = c;
                        aj = sum - c;
                    }
                } else if aj < 0.0 {
                    aj = 0.0;
                    ai = sum;
                }
                if sum > c {
                    if aj > c {
                        aj = c;
                        ai = sum - c;
                    }
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = sum;
                }
            }
            alpha[i] = ai;
            alpha[j] = aj;
            let (di, dj) = ((ai - old_i) * yi, (aj - old_j) * yj);
            for (t, g) in grad.iter_mut().enumerate() {
                *g += self.y[t] * (ki[t] * di + kj[t] * dj);
            }
            if self.record_trace {
                trace.push(objective_from_gradient(&alpha, &grad));
            }
        };
        let rho = self.rho(&alpha, &grad);
        Ok(SmoOutcome {
            objective: objective_from_gradient(&alpha, &grad),
            alpha,
            rho,
            iterations,
            gap,
            objective_trace: trace,
        })
    }

    fn rho(&self, alpha: &[f64], grad: &[f64]) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut free = 0usize;
        let mut sum = 0.0;
        for t in 0..alpha.len() {
            let yg = self.y[t] * grad[t];
            if self.is_upper(alpha[t]) {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}

/// `½ αᵀQα - Σα` given the dual gradient `Qα - 1`.
fn objective_from_gradient(alpha: &[f64], grad: &[f64]) -> f64 {
    0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>()
}

/// Dual objective `½ Σᵢⱼ αᵢαⱼyᵢyⱼK(xᵢ,xⱼ) - Σᵢ αᵢ` evaluated directly.
pub fn dual_objective(kernel: &Kernel, x: Rows<'_>, positive: &[bool], alpha: &[f64]) -> f64 {
    let y = |i: usize| if positive[i] { 1.0 } else { -1.0 };
    let mut quad = 0.0;
    for i in 0..x.len() {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..x.len() {
            quad += alpha[i] * alpha[j] * y(i) * y(j) * kernel.eval(x.row(i), x.row(j));
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}
