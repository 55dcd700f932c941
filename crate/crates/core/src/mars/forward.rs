//! Greedy forward growth of the basis.
//!
//! The current basis is kept as an orthonormal set `Q` with the residual `r`
//! orthogonal to it. For a parent basis `b` and variable `v`, the hinge
//! columns `h+ = b·max(0, x-t)` and `h- = b·max(0, t-x)` are linear in the
//! knot `t` over the points above (below) it, so every inner product the
//! RSS reduction needs (`h·q_j`, `h·r`, `h·h`) is an affine or quadratic
//! function of `t` with coefficients that are running sums over the points
//! sorted by `x[v]`. One sweep per side evaluates all knots of a
//! `(parent, variable)` pair in `O(n·|Q|)`.

use rayon::prelude::*;

use super::gcv::{count_knots, gcv};
use super::lsq::{fit_least_squares, residual_sum_of_squares};
use super::{BasisFunction, Direction, Hinge, MarsConfig, MarsModel};
use crate::data::{dot, Rows};
use crate::error::{Error, Result};

/// A new column is degenerate when less than this fraction of its squared
/// norm lies outside the span of the current basis.
const DEGENERATE: f64 = 1e-10;

/// Candidates whose RSS reductions differ by less than this fraction of the
/// current RSS are ties, resolved by (variable, knot, parent) order.
pub(crate) const TIE_TOLERANCE: f64 = 1e-9;

/// Admissible knots from the sorted values of one variable over the parent
/// region: every `min_span`-th order statistic starting at the minimum,
/// distinct values only, excluding the maximum.
pub fn candidate_knots(sorted: &[f64], min_span: usize) -> Vec<f64> {
    let Some(&max) = sorted.last() else {
        return Vec::new();
    };
    let mut knots: Vec<f64> = Vec::new();
    for &t in sorted.iter().step_by(min_span.max(1)) {
        if t < max && knots.last() != Some(&t) {
            knots.push(t);
        }
    }
    knots
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    parent: usize,
    variable: usize,
    knot: f64,
    reduction: f64,
    positive: bool,
    negative: bool,
}

impl Candidate {
    fn order_key(&self) -> (usize, f64, usize) {
        (self.variable, self.knot, self.parent)
    }
}

/// Running sums over a set of points for one side of a knot.
struct SideSums {
    /// Σ b·x·a and Σ b·a for every vector a in [q_1..q_M, r].
    s1: Vec<f64>,
    s0: Vec<f64>,
    /// Σ b²·x^k for k = 0, 1, 2.
    t: [f64; 3],
}

impl SideSums {
    fn new(k: usize) -> Self {
        Self {
            s1: vec![0.0; k],
            s0: vec![0.0; k],
            t: [0.0; 3],
        }
    }

    fn add(&mut self, b: f64, x: f64, vectors: &[&[f64]], i: usize) {
        for (k, a) in vectors.iter().enumerate() {
            let ba = b * a[i];
            self.s0[k] += ba;
            self.s1[k] += ba * x;
        }
        let b2 = b * b;
        self.t[0] += b2;
        self.t[1] += b2 * x;
        self.t[2] += b2 * x * x;
    }

    /// Inner products of `sign·b·(x - t)` with each vector, and its squared norm.
    fn project(&self, t: f64, sign: f64, out: &mut [f64]) -> f64 {
        for (o, (s1, s0)) in out.iter_mut().zip(self.s1.iter().zip(&self.s0)) {
            *o = sign * (s1 - t * s0);
        }
        (self.t[2] - 2.0 * t * self.t[1] + t * t * self.t[0]).max(0.0)
    }
}

/// RSS reduction of adding the residualised columns; returns
/// (reduction, use_positive, use_negative).
fn reduction(
    hp: &[f64],
    hpp: f64,
    hm: &[f64],
    hmm: f64,
    slots: usize,
) -> (f64, bool, bool) {
    let m = hp.len() - 1;
    let (cp, rp) = (&hp[..m], hp[m]);
    let (cm, rm) = (&hm[..m], hm[m]);
    let uu = hpp - dot(cp, cp);
    let ww = hmm - dot(cm, cm);
    let uw = -dot(cp, cm);
    let pos_ok = hpp > 0.0 && uu > DEGENERATE * hpp;
    let neg_ok = hmm > 0.0 && ww > DEGENERATE * hmm;
    let single_p = if pos_ok { rp * rp / uu } else { 0.0 };
    let single_m = if neg_ok { rm * rm / ww } else { 0.0 };
    let best_single = if single_p >= single_m {
        (single_p, pos_ok, false)
    } else {
        (single_m, false, true)
    };
    if slots >= 2 && pos_ok && neg_ok {
        let det = uu * ww - uw * uw;
        if det > DEGENERATE * uu * ww {
            let red = (ww * rp * rp - 2.0 * uw * rp * rm + uu * rm * rm) / det;
            return (red.max(0.0), true, true);
        }
    }
    best_single
}

#[allow(clippy::too_many_arguments)]
fn scan_variable(
    parent: usize,
    parent_col: &[f64],
    variable: usize,
    x: Rows<'_>,
    order: &[usize],
    q: &[Vec<f64>],
    residual: &[f64],
    min_span: usize,
    slots: usize,
) -> Vec<Candidate> {
    let active: Vec<usize> = order.iter().copied().filter(|&i| parent_col[i] > 0.0).collect();
    if active.len() < 2 {
        return Vec::new();
    }
    let xs: Vec<f64> = active.iter().map(|&i| x.row(i)[variable]).collect();
    let knots = candidate_knots(&xs, min_span);
    if knots.is_empty() {
        return Vec::new();
    }
    let mut vectors: Vec<&[f64]> = q.iter().map(Vec::as_slice).collect();
    vectors.push(residual);
    let k = vectors.len();

    // Points strictly below each knot, ascending sweep.
    let mut below = SideSums::new(k);
    let mut minus = vec![0.0; knots.len() * k];
    let mut minus_norm = vec![0.0; knots.len()];
    let mut p = 0;
    for (c, &t) in knots.iter().enumerate() {
        while p < xs.len() && xs[p] < t {
            below.add(parent_col[active[p]], xs[p], &vectors, active[p]);
            p += 1;
        }
        minus_norm[c] = below.project(t, -1.0, &mut minus[c * k..(c + 1) * k]);
    }

    // Points strictly above each knot, descending sweep.
    let mut above = SideSums::new(k);
    let mut plus = vec![0.0; k];
    let mut out = Vec::with_capacity(knots.len());
    let mut p = xs.len();
    for (c, &t) in knots.iter().enumerate().rev() {
        while p > 0 && xs[p - 1] > t {
            p -= 1;
            above.add(parent_col[active[p]], xs[p], &vectors, active[p]);
        }
        let plus_norm = above.project(t, 1.0, &mut plus);
        let (red, positive, negative) =
            reduction(&plus, plus_norm, &minus[c * k..(c + 1) * k], minus_norm[c], slots);
        if positive || negative {
            out.push(Candidate {
                parent,
                variable,
                knot: t,
                reduction: red,
                positive,
                negative,
            });
        }
    }
    out
}

/// Picks the best candidate: maximal reduction, near-ties broken by lowest
/// variable, then smallest knot, then lowest parent.
fn select(candidates: &[Candidate], rss: f64) -> Option<Candidate> {
    let best = candidates.iter().map(|c| c.reduction).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    let floor = best - TIE_TOLERANCE * rss;
    candidates
        .iter()
        .filter(|c| c.reduction >= floor)
        .min_by(|a, b| {
            let (va, ka, pa) = a.order_key();
            let (vb, kb, pb) = b.order_key();
            va.cmp(&vb).then(ka.total_cmp(&kb)).then(pa.cmp(&pb))
        })
        .copied()
}

fn orthonormalize(col: &[f64], q: &[Vec<f64>]) -> Option<Vec<f64>> {
    let norm0 = dot(col, col);
    if norm0 == 0.0 {
        return None;
    }
    let mut v = col.to_vec();
    // Two rounds of modified Gram-Schmidt.
    for _ in 0..2 {
        for qj in q {
            let c = dot(qj, &v);
            v.iter_mut().zip(qj).for_each(|(vi, qi)| *vi -= c * qi);
        }
    }
    let norm = dot(&v, &v);
    if norm <= DEGENERATE * norm0 {
        return None;
    }
    let inv = 1.0 / norm.sqrt();
    v.iter_mut().for_each(|vi| *vi *= inv);
    Some(v)
}

/// Grows the basis with mirror-pair hinges that most reduce the residual
/// sum of squares.
///
/// Stops at the basis budget (constant excluded), when the best step cuts
/// RSS by less than `forward_tolerance` of its current value, or when one
/// more knot would leave GCV undefined (effective parameters reaching the
/// observation count). With a single slot left, the better side of the
/// best pair is added alone. A side that is identically zero or already in
/// the span of the basis is dropped.
pub fn forward_pass(x: Rows<'_>, y: &[f64], config: &MarsConfig) -> Result<MarsModel> {
    config.validate()?;
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if n < 2 * config.min_span || n < 2 {
        return Err(Error::InvalidConfig(format!(
            "{n} observations is fewer than twice the minimum span {}",
            config.min_span
        )));
    }
    let dim = x.dim();
    let mean = y.iter().sum::<f64>() / n as f64;
    let mut basis = vec![BasisFunction::constant()];
    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let mut q: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    let mut residual: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let tss = dot(&residual, &residual);

    let orders: Vec<Vec<usize>> = (0..dim)
        .into_par_iter()
        .map(|v| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| x.row(a)[v].total_cmp(&x.row(b)[v]).then(a.cmp(&b)));
            idx
        })
        .collect();

    while basis.len() - 1 < config.max_basis_functions {
        let rss = dot(&residual, &residual);
        if rss <= f64::EPSILON * tss {
            break;
        }
        let slots = config.max_basis_functions - (basis.len() - 1);
        let pairs: Vec<(usize, usize)> = basis
            .iter()
            .enumerate()
            .filter(|(_, b)| b.degree() < config.max_interaction_degree)
            .flat_map(|(p, b)| (0..dim).filter(|&v| !b.uses_variable(v)).map(move |v| (p, v)))
            .collect();
        let candidates: Vec<Candidate> = pairs
            .par_iter()
            .map(|&(p, v)| {
                scan_variable(p, &columns[p], v, x, &orders[v], &q, &residual, config.min_span, slots)
            })
            .collect::<Vec<_>>()
            .concat();
        let Some(best) = select(&candidates, rss) else {
            break;
        };
        if best.reduction <= config.forward_tolerance * rss {
            break;
        }
        let sides = usize::from(best.positive) + usize::from(best.negative);
        let effective = (basis.len() + sides) as f64 + config.gcv_penalty * (count_knots(&basis) + 1) as f64;
        if effective >= n as f64 {
            break;
        }

        let parent = basis[best.parent].clone();
        let parent_col = columns[best.parent].clone();
        for (use_side, direction) in [(best.positive, Direction::Positive), (best.negative, Direction::Negative)] {
            if !use_side {
                continue;
            }
            let hinge = Hinge::new(best.variable, best.knot, direction);
            let col: Vec<f64> = parent_col
                .iter()
                .enumerate()
                .map(|(i, b)| b * hinge.eval(x.row(i)[best.variable]))
                .collect();
            let Some(qn) = orthonormalize(&col, &q) else {
                continue;
            };
            let c = dot(&qn, &residual);
            residual.iter_mut().zip(&qn).for_each(|(r, qi)| *r -= c * qi);
            q.push(qn);
            basis.push(parent.extended(hinge));
            columns.push(col);
        }
    }

    let coefficients = fit_least_squares(&basis, x, y)?;
    let rss = residual_sum_of_squares(&basis, &coefficients, x, y);
    let gcv = gcv(rss, n, basis.len(), count_knots(&basis), config.gcv_penalty)?;
    Ok(MarsModel {
        config: *config,
        input_dim: dim,
        basis,
        coefficients,
        rss,
        gcv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(max_basis: usize, min_span: usize) -> MarsConfig {
        MarsConfig {
            max_basis_functions: max_basis,
            min_span,
            ..MarsConfig::default()
        }
    }

    #[test]
    fn candidate_grid() {
        let sorted = [0.0, 1.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(candidate_knots(&sorted, 1), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(candidate_knots(&sorted, 2), vec![0.0, 1.0, 3.0]);
        assert!(candidate_knots(&[2.0, 2.0], 1).is_empty());
    }

    #[test]
    fn hinge_target_picks_its_knot() {
        let x: Vec<f64> = (0..7).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| (v - 3.0f64).max(0.0)).collect();
        let m = forward_pass(Rows::new(&x, 1).unwrap(), &y, &cfg(2, 1)).unwrap();
        assert_eq!(m.basis[1].factors[0].knot, 3.0);
        assert!(m.rss < 1e-20);
    }

    #[test]
    fn constant_target() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y = vec![2.5; 20];
        let m = forward_pass(Rows::new(&x, 1).unwrap(), &y, &cfg(5, 1)).unwrap();
        assert_eq!(m.basis.len(), 1);
        assert!((m.coefficients[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn linear_target_fits_exactly() {
        let x: Vec<f64> = (0..12).map(|i| f64::from(i) * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let m = forward_pass(Rows::new(&x, 1).unwrap(), &y, &cfg(3, 1)).unwrap();
        assert!(m.rss < 1e-10);
        assert!(m.basis.len() <= 4);
    }

    #[test]
    fn too_few_rows() {
        let x = [0.0, 1.0, 2.0];
        assert!(forward_pass(Rows::new(&x, 1).unwrap(), &[0.0, 1.0, 2.0], &cfg(3, 2)).is_err());
    }

    #[test]
    fn budget_respected_and_rss_monotone() {
        let x: Vec<f64> = (0..60).map(|i| f64::from(i) / 10.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 2.0).sin()).collect();
        let rows = Rows::new(&x, 1).unwrap();
        let mut last = f64::INFINITY;
        for budget in 1..=6 {
            let m = forward_pass(rows, &y, &cfg(budget, 3)).unwrap();
            assert!(m.basis.len() - 1 <= budget);
            assert!(m.rss <= last + 1e-12);
            last = m.rss;
        }
    }
}
