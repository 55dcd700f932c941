//! Acceptance suite: nine criteria, one PASS/FAIL line each, run in order.
//! Exits non-zero if any criterion fails.
//!
//! Criteria 8 and 9 need the KDD Cup 99 10% file. It is looked up in
//! `KNOTWORK_KDD_PATH`, then `data/kddcup.data_10_percent` at the workspace
//! root. Without it both criteria are reported as BLOCKED for the real file
//! and run on a synthetic file of the same format instead, at the same
//! thresholds.

#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use knotwork_cli::commands::CompareFile;
use knotwork_cli::mask::mask_timing;
use knotwork_core::eval::{metrics, ConfusionMatrix};
use knotwork_core::mars::{self, forward_pass};
use knotwork_core::mlp::MlpModel;
use knotwork_core::train::{
    oss_direction, rprop_step, scg_hessian_vector, scg_train_epoch, Objective, OssState, Point, RpropParams,
    RpropState, ScgParams, ScgState,
};
use knotwork_core::{ClassLabel, Kernel, MarsConfig, Result, Rows, SvmModel, SvmParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> std::result::Result<(), String> {
    check(elapsed.as_secs_f64() < limit_secs, || {
        format!("took {:.2} s, limit {limit_secs} s", elapsed.as_secs_f64())
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

// 1
fn confusion_arithmetic() -> Outcome {
    let start = Instant::now();
    let m = metrics(&ConfusionMatrix::from_counts(oracles::REFERENCE_CONFUSION)).map_err(|e| e.to_string())?;
    let close = |a: f64, b: f64| (a - b).abs() <= 0.05;
    check(close(m.accuracy, 97.04), || format!("accuracy {:.4}", m.accuracy))?;
    let recall = [99.6, 92.7, 97.5, 48.0, 95.0];
    let precision = [96.4, 85.7, 99.6, 34.3, 99.3];
    for k in 0..5 {
        let r = m.recall[k].ok_or("undefined recall")?;
        let p = m.precision[k].ok_or("undefined precision")?;
        check(close(r, recall[k]), || format!("class {}: recall {r:.4}", k + 1))?;
        check(close(p, precision[k]), || format!("class {}: precision {p:.4}", k + 1))?;
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!("accuracy {:.2}%, 5 recalls and 5 precisions within 0.05", m.accuracy))
}

// 2
fn svm_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let cs = [0.5, 1.0, 10.0];
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..20 {
        let l = 2 + k % 3;
        let c = cs[k % 3];
        let points: Vec<Vec<f64>> = (0..l)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let mut labels: Vec<bool> = (0..l).map(|_| rng.random_bool(0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let flat = points.concat();
        let params = SvmParams {
            kernel: Kernel::Linear,
            c,
            tol: 1e-3,
            ..SvmParams::default()
        };
        let (_, out) = SvmModel::fit_with_outcome(Rows::new(&flat, 2).unwrap(), &labels, &params)
            .map_err(|e| format!("instance {k}: {e}"))?;
        let y: Vec<f64> = labels.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();
        let ours = oracles::linear_dual(&points, &y, &out.alpha);
        let brute = oracles::lattice_dual_min(&points, &y, c, 0.01);
        let gap = oracles::kkt_gap(&points, &y, &out.alpha, c);
        worst = (worst.0.max((ours - brute).abs()), worst.1.max(gap));
        check((ours - brute).abs() <= 1e-3, || format!("instance {k}: dual {ours} vs lattice {brute}"))?;
        check(gap <= 1e-3, || format!("instance {k}: KKT violation {gap:e}"))?;
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("20 instances, max objective diff {:.1e}, max KKT gap {:.1e}", worst.0, worst.1))
}

// 3
fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let layers = 1 + case % 3;
        let sizes: Vec<usize> = (0..=layers).map(|_| rng.random_range(1..=6)).collect();
        let mut model = MlpModel::init(&sizes, rng.random()).unwrap();
        let params: Vec<f64> = (0..model.num_params()).map(|_| rng.random_range(-1.5..1.5)).collect();
        model.set_params(params).unwrap();
        let n = rng.random_range(1..=8);
        let x: Vec<f64> = (0..n * sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n * sizes[layers]).map(|_| rng.random_range(0.0..1.0)).collect();
        let analytic = model
            .loss_and_gradient(Rows::new(&x, sizes[0]).unwrap(), Rows::new(&y, sizes[layers]).unwrap())
            .map_err(|e| e.to_string())?
            .gradient;
        let numeric = oracles::central_difference(|w| oracles::mlp_mse(&sizes, w, &x, &y), model.params(), 1e-5);
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-12);
        worst = worst.max(rel);
        check(rel < 1e-6, || format!("case {case} ({layers} layers): relative error {rel:e}"))?;
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("50 nets of 1-3 layers, max relative error {worst:.1e}"))
}

/// `½ wᵀAw - bᵀw` with `A = Q diag(λ) Qᵀ`, λ in [1, 10].
struct Quadratic {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Quadratic {
    fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
        while q.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for u in &q {
                    let c = dot(u, &v);
                    v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= c * ui);
                }
            }
            let len = norm(&v);
            if len > 1e-6 {
                q.push(v.into_iter().map(|x| x / len).collect());
            }
        }
        let eig: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        let a = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| q[k][i] * eig[k] * q[k][j]).sum()).collect())
            .collect();
        let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self { a, b }
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| dot(row, w)).collect()
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn loss(&self, w: &[f64]) -> Result<f64> {
        Ok(0.5 * dot(&self.apply(w), w) - dot(&self.b, w))
    }

    fn loss_and_gradient(&self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        let g = self.apply(w).iter().zip(&self.b).map(|(p, q)| p - q).collect();
        Ok((self.loss(w)?, g))
    }
}

// 4
fn scg_quadratics() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut worst_hv = 0.0f64;
    let mut worst_extra = 0usize;
    for case in 0..30 {
        let n = rng.random_range(1..=20);
        let q = Quadratic::random(&mut rng, n);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let hv = scg_hessian_vector(&q, &w, &p, 1e-4, 0.0).map_err(|e| e.to_string())?;
        let exact = q.apply(&p);
        let diff: Vec<f64> = hv.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&exact);
        worst_hv = worst_hv.max(rel);
        check(rel <= 1e-5, || format!("case {case}: Hessian-vector relative error {rel:e}"))?;

        let params = ScgParams {
            lambda: 1e-12,
            ..ScgParams::default()
        };
        let mut state = ScgState::new(&params);
        let mut pt = Point::evaluate(&q, vec![0.0; n]).map_err(|e| e.to_string())?;
        let mut iterations = 0;
        while norm(&pt.gradient) >= 1e-8 && iterations < n + 5 {
            scg_train_epoch(&mut state, &q, &mut pt, &params).map_err(|e| e.to_string())?;
            iterations += 1;
        }
        let g = norm(&pt.gradient);
        check(g < 1e-8, || format!("case {case} (n={n}): |g| = {g:e} after {iterations} iterations"))?;
        worst_extra = worst_extra.max(iterations.saturating_sub(n));
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "30 quadratics, n <= 20: max Hv error {worst_hv:.1e}, optimum within n+{worst_extra} iterations"
    ))
}

// 5
fn oss_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(1..=12);
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if dot(&p, &v) <= 0.0 {
            continue;
        }
        let mut state = OssState::default();
        state.record(p.clone(), v.clone());
        let ours = oss_direction(&g, &mut state);
        let dense = oracles::dense_secant_direction(&p, &v, &g);
        for (a, b) in ours.iter().zip(&dense) {
            worst = worst.max((a - b).abs());
        }
        checked += 1;
    }
    check(worst <= 1e-10, || format!("max abs difference {worst:e}"))?;
    within(start.elapsed(), 1.0)?;
    Ok(format!("100 triples, max abs difference {worst:.1e}"))
}

/// Loss multiplied by a positive constant.
struct Scaled<'a, O: Objective>(&'a O, f64);

impl<O: Objective> Objective for Scaled<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn loss(&self, w: &[f64]) -> Result<f64> {
        Ok(self.1 * self.0.loss(w)?)
    }

    fn loss_and_gradient(&self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (l, g) = self.0.loss_and_gradient(w)?;
        Ok((self.1 * l, g.into_iter().map(|x| self.1 * x).collect()))
    }
}

// 6
fn rprop_properties() -> Outcome {
    let start = Instant::now();
    let params = RpropParams::default();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
        let model = MlpModel::init(&[4, 6, 3], seed).unwrap();
        let x: Vec<f64> = (0..30 * 4).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..30 * 3).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
        let obj = knotwork_core::mlp::MlpObjective {
            model: &model,
            x: Rows::new(&x, 4).unwrap(),
            y: Rows::new(&y, 3).unwrap(),
        };
        let factor = rng.random_range(0.01..1000.0);
        let scaled = Scaled(&obj, factor);
        let mut w1 = model.params().to_vec();
        let mut w2 = w1.clone();
        let mut s1 = RpropState::new(w1.len(), &params);
        let mut s2 = RpropState::new(w2.len(), &params);
        for epoch in 0..20 {
            let (_, g1) = obj.loss_and_gradient(&w1).map_err(|e| e.to_string())?;
            let (_, g2) = scaled.loss_and_gradient(&w2).map_err(|e| e.to_string())?;
            rprop_step(&g1, &mut s1, &mut w1, &params);
            rprop_step(&g2, &mut s2, &mut w2, &params);
            check(w1.iter().zip(&w2).all(|(a, b)| a.to_bits() == b.to_bits()), || {
                format!("seed {seed}: trajectories split at epoch {epoch} (scale {factor})")
            })?;
            for s in [&s1, &s2] {
                check(
                    s.step_sizes.iter().all(|&d| (params.min_step..=params.max_step).contains(&d)),
                    || format!("seed {seed}: step size outside bounds at epoch {epoch}"),
                )?;
            }
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok("10 seeds x 20 epochs bit-identical under loss scaling, steps within bounds".into())
}

// 7
fn mars_recovery() -> Outcome {
    let start = Instant::now();
    let x: Vec<f64> = (0..200).map(|i| 6.0 * i as f64 / 199.0).collect();
    let y: Vec<f64> = x.iter().map(|v| (v - 3.0f64).max(0.0)).collect();
    let m = forward_pass(Rows::new(&x, 1).unwrap(), &y, &MarsConfig::default()).map_err(|e| e.to_string())?;
    let step = 6.0 / 199.0;
    let nearest = m.basis[1..]
        .iter()
        .map(|b| (b.factors[0].knot - 3.0).abs())
        .fold(f64::INFINITY, f64::min);
    check(nearest <= step, || format!("closest knot is {nearest} from 3"))?;

    let n = 200;
    let x: Vec<f64> = (0..n).map(|i| (i as f64 - 50.0) / 50.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * (v - 1.0f64).max(0.0) - (0.5 - v).max(0.0) + 1.0).collect();
    let cfg = MarsConfig {
        max_basis_functions: 10,
        min_span: 1,
        ..MarsConfig::default()
    };
    let fit = mars::fit(Rows::new(&x, 1).unwrap(), &y, &cfg).map_err(|e| e.to_string())?;
    check(fit.rss < 1e-8 * n as f64, || format!("two-hinge rss {:e}", fit.rss))?;

    let mut rng = ChaCha8Rng::seed_from_u64(70);
    for case in 0..30 {
        let n = rng.random_range(10..=30);
        let d = rng.random_range(1..=2);
        let min_span = rng.random_range(1..=3);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0].abs() + rng.random_range(-0.5..0.5)).collect();
        let cfg = MarsConfig {
            max_basis_functions: 2,
            min_span,
            ..MarsConfig::default()
        };
        let m = forward_pass(Rows::new(&rows.concat(), d).unwrap(), &y, &cfg).map_err(|e| e.to_string())?;
        let expected = oracles::mars_first_pick(&rows, &y, min_span).ok_or("oracle found no pick")?;
        let first = m.basis.get(1).ok_or_else(|| format!("case {case}: no basis function added"))?.factors[0];
        check((first.variable, first.knot) == expected, || {
            format!("case {case}: picked {:?}, exhaustive {expected:?}", (first.variable, first.knot))
        })?;
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("knot {nearest:.4} from 3, two-hinge rss {:.1e}, 30/30 first picks match", fit.rss))
}

// 8 and 9

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn kdd_file() -> Option<PathBuf> {
    let candidates = [
        std::env::var_os("KNOTWORK_KDD_PATH").map(PathBuf::from),
        Some(workspace_root().join("data/kddcup.data_10_percent")),
    ];
    candidates.into_iter().flatten().find(|p| p.is_file())
}

fn knotwork(dir: &Path, args: &[&str]) -> std::result::Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_knotwork"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!(
            "`knotwork {}` exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })
}

/// Runs prep and compare into `out` and returns the comparison.
fn desk_run(dir: &Path, out: &str) -> std::result::Result<CompareFile, String> {
    knotwork(dir, &["--config", "run.toml", "--out", out, "prep"])?;
    knotwork(dir, &["--config", "run.toml", "--out", out, "compare"])?;
    let bytes = std::fs::read(dir.join(out).join("reports/compare.json")).map_err(|e| e.to_string())?;
    serde_json::from_slice(&bytes).map_err(|e| e.to_string())
}

fn masked_outputs(root: &Path) -> std::result::Result<Vec<(String, String)>, String> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(root.join("reports"))
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.path()).map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    for name in ["manifest.json", "class_distribution.txt", "class_distribution.csv"] {
        files.push(root.join("bundle").join(name));
    }
    files.sort();
    files
        .iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok((name.clone(), mask_timing(&name, &text)))
        })
        .collect()
}

struct Desk {
    real_data: bool,
    dir: tempfile::TempDir,
    first: std::result::Result<CompareFile, String>,
    elapsed: Duration,
}

fn desk_setup() -> std::result::Result<Desk, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (data, real_data) = match kdd_file() {
        Some(p) => (p.canonicalize().map_err(|e| e.to_string())?, true),
        None => {
            knotwork(dir.path(), &["--seed", "99", "synth", "--scale", "0.02", "kdd.txt"])?;
            (dir.path().join("kdd.txt"), false)
        }
    };
    let config = format!(
        "dataset = {:?}\ntotal = 3000\ntest = 1500\nseed = 1\n[compare]\nmodels = [\"svm\", \"rprop\", \"mars\"]\n",
        data.to_string_lossy()
    );
    std::fs::write(dir.path().join("run.toml"), config).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let first = desk_run(dir.path(), "run1");
    Ok(Desk {
        real_data,
        dir,
        first,
        elapsed: start.elapsed(),
    })
}

fn desk_scale(desk: &Desk) -> Outcome {
    let grid = &desk.first.as_ref().map_err(Clone::clone)?.grid;
    let mut lows = Vec::new();
    for model in ["SVM", "RP", "MARS"] {
        for class in ClassLabel::ALL {
            let cell = grid.get(model, class).ok_or_else(|| format!("{model}/{class}: missing cell"))?;
            if matches!(class, ClassLabel::Normal | ClassLabel::Probe | ClassLabel::DoS) {
                check(cell >= 90.0, || format!("{model}/{class}: {cell:.2}% < 90%"))?;
                lows.push(cell);
            }
        }
    }
    within(desk.elapsed, 600.0)?;
    let min = lows.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "SVM, RP, MARS: Normal/Probe/DoS >= {min:.2}%, U2Su and R2L completed, {:.1} s",
        desk.elapsed.as_secs_f64()
    ))
}

fn determinism(desk: &Desk) -> Outcome {
    desk.first.as_ref().map_err(Clone::clone)?;
    desk_run(desk.dir.path(), "run2")?;
    let a = masked_outputs(&desk.dir.path().join("run1"))?;
    let b = masked_outputs(&desk.dir.path().join("run2"))?;
    check(a.len() == b.len(), || format!("{} vs {} report files", a.len(), b.len()))?;
    for ((na, ta), (nb, tb)) in a.iter().zip(&b) {
        check(na == nb, || format!("file sets differ at {na} / {nb}"))?;
        check(ta == tb, || format!("{na} differs between runs"))?;
    }
    Ok(format!("{} report files byte-identical after masking timings", a.len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome, note: &str| {
        match outcome {
            Ok(detail) => println!("criterion {n} {name}: PASS{note} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} {name}: FAIL{note} ({why})");
            }
        }
    };
    report(1, "confusion-matrix arithmetic", confusion_arithmetic(), "");
    report(2, "SMO vs lattice oracle", svm_oracle(), "");
    report(3, "MLP gradient check", gradient_check(), "");
    report(4, "SCG Hessian-vector and convergence", scg_quadratics(), "");
    report(5, "OSS vs dense update", oss_oracle(), "");
    report(6, "RPROP scale invariance and step bounds", rprop_properties(), "");
    report(7, "MARS recovery", mars_recovery(), "");
    match desk_setup() {
        Ok(desk) => {
            let note = if desk.real_data {
                ""
            } else {
                println!(
                    "criteria 8-9: BLOCKED on the KDD Cup 99 10% file (not found; set KNOTWORK_KDD_PATH); \
                     running on a synthetic file in its format instead"
                );
                " on synthetic stand-in"
            };
            report(8, "desk-scale end-to-end run", desk_scale(&desk), note);
            report(9, "run-to-run determinism", determinism(&desk), note);
        }
        Err(e) => {
            report(8, "desk-scale end-to-end run", Err(e.clone()), "");
            report(9, "run-to-run determinism", Err(e), "");
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
