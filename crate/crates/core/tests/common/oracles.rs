//! Slow, direct reference computations. Nothing here calls into the library.

#![allow(dead_code)]

/// Gaussian elimination with partial pivoting. `None` when singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Least squares through the normal equations: (coefficients, RSS).
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = columns.len();
    let a: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| columns[i].iter().zip(&columns[j]).map(|(p, q)| p * q).sum()).collect())
        .collect();
    let b: Vec<f64> = columns.iter().map(|c| c.iter().zip(y).map(|(p, q)| p * q).sum()).collect();
    let coef = gauss_solve(a, b)?;
    let rss = (0..y.len())
        .map(|i| {
            let fit: f64 = columns.iter().zip(&coef).map(|(c, w)| c[i] * w).sum();
            (y[i] - fit).powi(2)
        })
        .sum();
    Some((coef, rss))
}

/// Knots a single variable admits under a constant parent: every
/// `min_span`-th order statistic, without repeats, below the maximum.
pub fn admissible_knots(values: &[f64], min_span: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let max = *sorted.last().unwrap();
    let mut out: Vec<f64> = Vec::new();
    let mut k = 0;
    while k < sorted.len() {
        let t = sorted[k];
        if t < max && out.last() != Some(&t) {
            out.push(t);
        }
        k += min_span;
    }
    out
}

/// First forward step by brute force: the (variable, knot) whose mirror pair
/// added to the constant gives the smallest RSS. Near-ties (1e-9 relative)
/// go to the lowest variable, then the smallest knot.
pub fn mars_first_pick(rows: &[Vec<f64>], y: &[f64], min_span: usize) -> Option<(usize, f64)> {
    let n = rows.len();
    let mut scored: Vec<(usize, f64, f64)> = Vec::new();
    for v in 0..rows[0].len() {
        let xs: Vec<f64> = rows.iter().map(|r| r[v]).collect();
        for t in admissible_knots(&xs, min_span) {
            let plus: Vec<f64> = xs.iter().map(|x| (x - t).max(0.0)).collect();
            let minus: Vec<f64> = xs.iter().map(|x| (t - x).max(0.0)).collect();
            let mut cols = vec![vec![1.0; n]];
            for c in [plus, minus] {
                if c.iter().any(|&v| v != 0.0) {
                    cols.push(c);
                }
            }
            if let Some((_, rss)) = least_squares(&cols, y) {
                scored.push((v, t, rss));
            }
        }
    }
    let best = scored.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    scored
        .into_iter()
        .filter(|s| s.2 <= best + 1e-9 * tss)
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .map(|(v, t, _)| (v, t))
}

pub fn gcv(rss: f64, n: usize, terms: usize, knots: usize, d: f64) -> f64 {
    let c = terms as f64 + d * knots as f64;
    (rss / n as f64) / (1.0 - c / n as f64).powi(2)
}

/// BFGS inverse-Hessian update from the identity, materialised as a dense
/// matrix, applied to `-g`.
pub fn dense_secant_direction(p: &[f64], v: &[f64], g: &[f64]) -> Vec<f64> {
    let n = p.len();
    let rho = 1.0 / p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    // H = (I - rho p vᵀ)(I - rho v pᵀ) + rho p pᵀ
    let left: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - rho * p[i] * v[j]).collect())
        .collect();
    let right: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - rho * v[i] * p[j]).collect())
        .collect();
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            h[i][j] = (0..n).map(|k| left[i][k] * right[k][j]).sum::<f64>() + rho * p[i] * p[j];
        }
    }
    (0..n).map(|i| -(0..n).map(|j| h[i][j] * g[j]).sum::<f64>()).collect()
}

/// `½ αᵀQα - Σα` with `Q_ij = yᵢyⱼ xᵢ·xⱼ`.
pub fn linear_dual(points: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let mut q = 0.0;
    for i in 0..points.len() {
        for j in 0..points.len() {
            let k: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum();
            q += alpha[i] * alpha[j] * y[i] * y[j] * k;
        }
    }
    0.5 * q - alpha.iter().sum::<f64>()
}

/// Minimum of the linear-kernel dual over `0 <= α <= C`, `Σ yᵢαᵢ = 0`.
///
/// All but the last two multipliers run over a lattice of spacing `step`;
/// the second-to-last is minimised exactly on its feasible segment and the
/// last follows from the equality constraint.
pub fn lattice_dual_min(points: &[Vec<f64>], y: &[f64], c: f64, step: f64) -> f64 {
    let l = points.len();
    let ticks = (c / step).round() as usize;
    let free = l - 2;
    let mut idx = vec![0usize; free];
    let mut best = f64::INFINITY;
    loop {
        let mut alpha = vec![0.0; l];
        for (a, &k) in alpha.iter_mut().zip(&idx) {
            *a = k as f64 * step;
        }
        let s: f64 = (0..free).map(|i| y[i] * alpha[i]).sum();
        // alpha[l-1] = c0 + c1 * a with a = alpha[l-2]
        let c0 = -y[l - 1] * s;
        let c1 = -y[l - 1] * y[l - 2];
        let (mut lo, mut hi) = (0.0f64, c);
        let (b1, b2) = ((0.0 - c0) / c1, (c - c0) / c1);
        lo = lo.max(b1.min(b2));
        hi = hi.min(b1.max(b2));
        if lo <= hi + 1e-12 {
            let hi = hi.max(lo);
            let eval = |a: f64| {
                let mut al = alpha.clone();
                al[l - 2] = a;
                al[l - 1] = (c0 + c1 * a).clamp(0.0, c);
                linear_dual(points, y, &al)
            };
            let (f0, f1, fm) = (eval(lo), eval(hi), eval(0.5 * (lo + hi)));
            let mut cands = vec![f0, f1];
            // Quadratic through three points gives the exact segment minimiser.
            let h = 0.5 * (hi - lo);
            if h > 0.0 {
                let curv = (f0 + f1 - 2.0 * fm) / (h * h);
                if curv > 0.0 {
                    let slope = (f1 - f0) / (2.0 * h);
                    let a = (0.5 * (lo + hi) - slope / curv).clamp(lo, hi);
                    cands.push(eval(a));
                }
            }
            best = cands.into_iter().fold(best, f64::min);
        }
        // Next lattice point.
        let mut k = 0;
        loop {
            if k == free {
                return best;
            }
            idx[k] += 1;
            if idx[k] <= ticks {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Largest KKT violation `m(α) - M(α)` of the linear-kernel dual.
pub fn kkt_gap(points: &[Vec<f64>], y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let l = points.len();
    let grad: Vec<f64> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    let k: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum();
                    y[i] * y[j] * k * alpha[j]
                })
                .sum::<f64>()
                - 1.0
        })
        .collect();
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..l {
        let v = -y[t] * grad[t];
        let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
        let in_low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
        if in_up {
            up = up.max(v);
        }
        if in_low {
            low = low.min(v);
        }
    }
    if up.is_finite() && low.is_finite() {
        up - low
    } else {
        0.0
    }
}

/// Layer-by-layer forward pass over the documented flat layout:
/// per layer a row-major `out × in` weight block, then the biases.
pub fn mlp_forward(sizes: &[usize], params: &[f64], x: &[f64], output_logistic: bool) -> Vec<f64> {
    let mut a = x.to_vec();
    let mut off = 0;
    for l in 0..sizes.len() - 1 {
        let (fin, fout) = (sizes[l], sizes[l + 1]);
        let last = l + 2 == sizes.len();
        let mut next = vec![0.0; fout];
        for j in 0..fout {
            let mut z = params[off + fin * fout + j];
            for i in 0..fin {
                z += params[off + j * fin + i] * a[i];
            }
            next[j] = if last {
                if output_logistic {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    z
                }
            } else {
                z.tanh()
            };
        }
        off += fin * fout + fout;
        a = next;
    }
    a
}

/// Mean squared error over all outputs of a batch, via [`mlp_forward`].
pub fn mlp_mse(sizes: &[usize], params: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let (din, dout) = (sizes[0], *sizes.last().unwrap());
    let n = x.len() / din;
    let mut sse = 0.0;
    for i in 0..n {
        let out = mlp_forward(sizes, params, &x[i * din..(i + 1) * din], true);
        sse += out.iter().zip(&y[i * dout..(i + 1) * dout]).map(|(o, t)| (o - t).powi(2)).sum::<f64>();
    }
    sse / (n * dout) as f64
}

/// Central differences with step `h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, w: &[f64], h: f64) -> Vec<f64> {
    let mut w = w.to_vec();
    (0..w.len())
        .map(|i| {
            let orig = w[i];
            w[i] = orig + h;
            let fp = f(&w);
            w[i] = orig - h;
            let fm = f(&w);
            w[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Column sums, row sums and trace of a 5×5 table.
pub fn margins(c: &[[u64; 5]; 5]) -> ([u64; 5], [u64; 5], u64) {
    let rows = std::array::from_fn(|i| c[i].iter().sum());
    let cols = std::array::from_fn(|j| c.iter().map(|r| r[j]).sum());
    (rows, cols, (0..5).map(|k| c[k][k]).sum())
}

/// Reference 5-class confusion matrix of an RPROP-trained network on 6890
/// test records (rows true class).
pub const REFERENCE_CONFUSION: [[u64; 5]; 5] = [
    [1394, 5, 1, 0, 0],
    [49, 649, 2, 0, 0],
    [3, 101, 4096, 2, 0],
    [0, 1, 8, 12, 4],
    [0, 1, 6, 21, 535],
];
