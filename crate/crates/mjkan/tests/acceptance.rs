//! Acceptance suite: one test per numbered criterion, each printing a
//! `criterion N (<name>): PASS` line on success (run with `--nocapture` to
//! see them). Criteria with wall-clock bounds take a shared lock so they
//! are not timed while contending with each other.

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use mjkan::data::{gen_classification, gen_regression, ClassificationKind, RegressionTaskKind};
use mjkan::harness::{
    build_model, run_basis_sweep, run_mnist, run_regression_suite, train, BasisSweepOptions,
    LossKind, MnistOptions, ModelSpec, OptimSettings, RegressionSuiteOptions, TrainConfig,
    TrainData,
};
use mjkan::layer::{kan_param_count, mlp_param_count};
use mjkan::model::{Layer, SequentialModel, Squash};
use mjkan::rbf::RbfBasis;
use mjkan::symbolic::extract;
use mjkan::tensor::{Matrix, Tensor3};
use mjkan::{DenseLayer, MjkanLayer};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

static HEAVY: Mutex<()> = Mutex::new(());

fn heavy_lock() -> std::sync::MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|p| p.into_inner())
}

/// Fixed linear functional of the outputs used as the scalar loss for
/// finite-difference checks.
fn probe_weight(r: usize, c: usize) -> f64 {
    0.3 + 0.17 * (r as f64) - 0.09 * (c as f64)
}

fn probe_loss(model: &SequentialModel<f64>, x: &Matrix<f64>) -> f64 {
    let (y, _) = model.forward(x).unwrap();
    let mut total = 0.0;
    for r in 0..y.rows() {
        for c in 0..y.cols() {
            total += probe_weight(r, c) * y.get(r, c);
        }
    }
    total
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Central finite differences over every parameter and input of `model`.
fn finite_difference_check(model: &SequentialModel<f64>, x: &Matrix<f64>, tol: f64, tag: &str) {
    let h = 1e-5;
    let (y, caches) = model.forward(x).unwrap();
    let d_y = Matrix::from_fn(y.rows(), y.cols(), probe_weight);
    let (grads, d_x) = model.backward(&caches, &d_y).unwrap();

    let grad_blocks = grads.blocks();
    let n_blocks = grad_blocks.len();
    for bi in 0..n_blocks {
        for j in 0..grad_blocks[bi].1.len() {
            let mut up = model.clone();
            up.param_blocks_mut()[bi].1[j] += h;
            let mut dn = model.clone();
            dn.param_blocks_mut()[bi].1[j] -= h;
            let fd = (probe_loss(&up, x) - probe_loss(&dn, x)) / (2.0 * h);
            let analytic = grad_blocks[bi].1[j];
            assert!(
                rel_err(analytic, fd) < tol,
                "{tag}: block {} [{j}]: analytic={analytic:e} fd={fd:e} rel={:e}",
                grad_blocks[bi].0,
                rel_err(analytic, fd)
            );
        }
    }
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            let mut up = x.clone();
            up.set(r, c, x.get(r, c) + h);
            let mut dn = x.clone();
            dn.set(r, c, x.get(r, c) - h);
            let fd = (probe_loss(model, &up) - probe_loss(model, &dn)) / (2.0 * h);
            let analytic = d_x.get(r, c);
            assert!(
                rel_err(analytic, fd) < tol,
                "{tag}: input ({r},{c}): analytic={analytic:e} fd={fd:e}"
            );
        }
    }
}

#[test]
fn criterion_01_gradient_exactness() {
    let started = Instant::now();
    let dims = [1usize, 2, 5];
    let ks = [1usize, 3, 5];
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    for arch in 0..20 {
        let depth = 1 + arch % 3;
        let mut widths = vec![dims[rng.gen_range(0..dims.len())]];
        for _ in 0..depth {
            widths.push(dims[rng.gen_range(0..dims.len())]);
        }
        let mut layers: Vec<Layer<f64>> = Vec::new();
        for li in 0..depth {
            let (d_in, d_out) = (widths[li], widths[li + 1]);
            if li > 0 && rng.gen_bool(0.4) {
                if rng.gen_bool(0.5) {
                    layers.push(Layer::Relu);
                } else {
                    layers.push(Layer::Squash(Squash::new(-3.0, 3.0).unwrap()));
                }
            }
            if rng.gen_bool(0.5) {
                let k = ks[rng.gen_range(0..ks.len())];
                let basis = RbfBasis::new_uniform(k, -3.0, 3.0, 1.0).unwrap();
                let use_base = rng.gen_bool(0.5);
                let mut layer =
                    MjkanLayer::init(d_in, d_out, basis, use_base, 1.0, rng.gen()).unwrap();
                if use_base && rng.gen_bool(0.3) {
                    layer.set_base_nonlinear(true);
                }
                layers.push(Layer::Mjkan(layer));
            } else {
                layers.push(Layer::Dense(DenseLayer::init(d_in, d_out, rng.gen()).unwrap()));
            }
        }
        let model = SequentialModel::new(layers).unwrap();
        let n = 1 + arch % 3;
        // keep inputs away from relu kinks at exactly zero
        let x = Matrix::from_fn(n, widths[0], |r, c| {
            let v: f64 = rng.gen_range(-2.5..2.5);
            if v.abs() < 1e-3 {
                0.37 + 0.1 * (r + c) as f64
            } else {
                v
            }
        });
        finite_difference_check(&model, &x, 1e-5, &format!("arch {arch}"));
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "gradient check took {elapsed:.1}s (budget 60s)");
    println!("criterion 1 (gradient exactness, 20 architectures): PASS ({elapsed:.1}s)");
}

#[test]
fn criterion_02_linear_reduction() {
    // constant_one basis with K = 1 must match the affine layer with
    // W = gamma squeezed, b = summed beta, in forward and backward.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (d_in, d_out) = (4, 3);
    let basis = RbfBasis::constant_one(1, -3.0, 3.0).unwrap();
    let gamma = Tensor3::from_fn(d_in, 1, d_out, |_, _, _| rng.gen_range(-1.0..1.0));
    let beta = Tensor3::from_fn(d_in, 1, d_out, |_, _, _| rng.gen_range(-1.0..1.0));
    let mjkan = MjkanLayer::from_parts(basis, gamma.clone(), beta.clone(), None, None, false).unwrap();

    let w = Matrix::from_fn(d_in, d_out, |i, o| gamma.at(i, 0, o));
    let b: Vec<f64> = (0..d_out)
        .map(|o| (0..d_in).map(|i| beta.at(i, 0, o)).sum())
        .collect();
    let affine = DenseLayer::from_parts(w, b).unwrap();

    for trial in 0..100 {
        let x = Matrix::from_fn(2, d_in, |_, _| rng.gen_range(-5.0..5.0));
        let (y_m, cache_m) = mjkan.forward(&x).unwrap();
        let (y_a, cache_a) = affine.forward(&x).unwrap();
        assert!(y_m.max_abs_diff(&y_a) < 1e-12, "trial {trial} forward");

        let d_y = Matrix::from_fn(2, d_out, |r, c| rng.gen_range(-1.0..1.0) + (r + c) as f64 * 0.1);
        let (gm, dx_m) = mjkan.backward(&cache_m, &d_y).unwrap();
        let (ga, dx_a) = affine.backward(&cache_a, &d_y).unwrap();
        assert!(dx_m.max_abs_diff(&dx_a) < 1e-12, "trial {trial} dX");
        for i in 0..d_in {
            for o in 0..d_out {
                assert!((gm.gamma.at(i, 0, o) - ga.w.get(i, o)).abs() < 1e-12);
                // each beta[i,0,o] gradient equals the affine bias gradient
                assert!((gm.beta.at(i, 0, o) - ga.b[o]).abs() < 1e-12);
            }
        }
    }
    println!("criterion 2 (linear reduction to affine layer): PASS");
}

#[test]
fn criterion_03_kan_form_reduction() {
    // gamma = 0, no base: output must equal the double-loop sum of
    // beta-weighted basis activations.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (d_in, k, d_out) = (3, 4, 2);
    let basis = RbfBasis::new_uniform(k, -3.0, 3.0, 1.0).unwrap();
    let gamma = Tensor3::zeros(d_in, k, d_out);
    let beta = Tensor3::from_fn(d_in, k, d_out, |_, _, _| rng.gen_range(-1.0..1.0));
    let layer = MjkanLayer::from_parts(basis.clone(), gamma, beta.clone(), None, None, false).unwrap();

    let x = Matrix::from_fn(50, d_in, |_, _| rng.gen_range(-4.0..4.0));
    let (y, _) = layer.forward(&x).unwrap();
    for n in 0..x.rows() {
        for o in 0..d_out {
            let mut expect = 0.0;
            for i in 0..d_in {
                let phi = basis.eval(x.get(n, i)).unwrap();
                for kk in 0..k {
                    expect += beta.at(i, kk, o) * phi[kk];
                }
            }
            assert!(
                (y.get(n, o) - expect).abs() < 1e-12,
                "sample {n} output {o}: {} vs {expect}",
                y.get(n, o)
            );
        }
    }
    println!("criterion 3 (KAN-form reduction, gamma=0): PASS");
}

#[test]
fn criterion_04_symbolic_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for model_idx in 0..10 {
        let d_in = 1 + model_idx % 4;
        let k = 2 + model_idx % 5;
        let hidden = 2 + model_idx % 6;
        let classes = 1 + model_idx % 3;
        let use_base = model_idx % 2 == 0;
        let basis = RbfBasis::new_uniform(k, -3.0, 3.0, 1.0).unwrap();
        let mut mjkan = MjkanLayer::init(d_in, hidden, basis, use_base, 1.0, rng.gen()).unwrap();
        for v in mjkan.beta_mut().data_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let mut head = DenseLayer::init(hidden, classes, rng.gen()).unwrap();
        for v in head.bias_mut() {
            *v = rng.gen_range(-0.5..0.5);
        }
        let model = SequentialModel::new(vec![Layer::Mjkan(mjkan), Layer::Dense(head)]).unwrap();
        let sym = extract(&model).unwrap();
        // 200 random points spanning 3x the center range
        let x = Matrix::from_fn(200, d_in, |_, _| rng.gen_range(-9.0..9.0));
        let (direct, _) = model.forward(&x).unwrap();
        let symbolic = sym.eval(&x).unwrap();
        let diff = direct.max_abs_diff(&symbolic);
        assert!(diff < 1e-10, "model {model_idx}: max diff {diff:e}");
    }
    println!("criterion 4 (symbolic extraction exactness, 10 models): PASS");
}

#[test]
fn criterion_05_param_count_formulas() {
    assert_eq!(kan_param_count(1, 1, 5, 3), 12);
    assert_eq!(mlp_param_count(3, 4), 16);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let d_in = rng.gen_range(1..12);
        let d_out = rng.gen_range(1..12);
        let k = rng.gen_range(1..9);
        let use_base = rng.gen_bool(0.5);
        let basis = RbfBasis::new_uniform(k, -3.0, 3.0, 1.0).unwrap();
        let layer = MjkanLayer::init(d_in, d_out, basis, use_base, 1.0, rng.gen()).unwrap();
        let tally = layer.gamma().data().len()
            + layer.beta().data().len()
            + layer.base_weight().map_or(0, |w| w.data().len())
            + layer.base_bias().map_or(0, |b| b.len());
        assert_eq!(layer.param_count(), tally, "d_in={d_in} d_out={d_out} k={k} base={use_base}");
    }
    println!("criterion 5 (parameter-count formulas): PASS");
}

#[test]
fn criterion_06_function_regression_trends() {
    let _guard = heavy_lock();
    let started = Instant::now();
    let opts = RegressionSuiteOptions::default();
    let result = run_regression_suite(&opts).expect("suite runs");
    let elapsed = started.elapsed().as_secs_f64();

    let get = |task: RegressionTaskKind, col: &str| result.rmse(task, col).unwrap();
    let tasks = mjkan::data::ALL_REGRESSION_TASKS;

    // (a) capacity: K=50 no worse than K=5 on every task
    for task in tasks {
        let r50 = get(task, "mjkan_50");
        let r5 = get(task, "mjkan_5");
        assert!(
            r50 <= r5,
            "task {}: mjkan_50 rmse {r50} > mjkan_5 rmse {r5}",
            task.name()
        );
    }
    // (b) K=50 beats the MLP128 baseline on at least 4 of 5 tasks
    let wins = tasks
        .iter()
        .filter(|&&t| get(t, "mjkan_50") <= get(t, "mlp128"))
        .count();
    assert!(wins >= 4, "mjkan_50 beat mlp128 on only {wins}/5 tasks");
    // (c) step function with K=50 resolves the discontinuities
    let step50 = get(RegressionTaskKind::StepFunction, "mjkan_50");
    assert!(step50 < 0.1, "step_function mjkan_50 rmse {step50} >= 0.1");

    assert!(elapsed < 900.0, "suite took {elapsed:.0}s (budget 900s)");
    println!(
        "criterion 6 (function regression trends): PASS ({elapsed:.0}s, step_50={step50:.4}, wins={wins}/5)"
    );
}

fn data_dir() -> PathBuf {
    match std::env::var("MJKAN_DATA_DIR") {
        Ok(d) => PathBuf::from(d),
        Err(_) => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

fn mnist_options() -> Option<MnistOptions> {
    let root = data_dir();
    let opts = MnistOptions::new(
        root.join("train-images-idx3-ubyte"),
        root.join("train-labels-idx1-ubyte"),
        root.join("t10k-images-idx3-ubyte"),
        root.join("t10k-labels-idx1-ubyte"),
    );
    if opts.train_images.exists() && opts.train_labels.exists() && opts.test_images.exists() && opts.test_labels.exists()
    {
        Some(opts)
    } else {
        None
    }
}

#[test]
fn criterion_07_mnist_subset_mode() {
    let Some(mut opts) = mnist_options() else {
        panic!(
            "MNIST IDX files not found under {} (set MJKAN_DATA_DIR); the subset-mode gate needs real data",
            data_dir().display()
        );
    };
    let _guard = heavy_lock();
    let started = Instant::now();
    opts.subset = Some(10_000);
    let outcome = run_mnist(&opts).expect("mnist subset run");
    let elapsed = started.elapsed().as_secs_f64();
    let acc = outcome.mjkan.metric("test_accuracy").unwrap();
    assert!(
        acc >= 0.92,
        "mjkan subset accuracy {acc:.4} below the 0.92 gate (trained on {} samples)",
        outcome.train_len
    );
    assert!(elapsed < 300.0, "subset mode took {elapsed:.0}s (budget 300s)");
    println!(
        "criterion 7 (mnist 10k-subset mode): PASS ({elapsed:.0}s, mjkan={acc:.4} on {} train / {} test samples)",
        outcome.train_len, outcome.test_len
    );
}

#[test]
fn criterion_07_mnist_full_set() {
    let Some(opts) = mnist_options() else {
        println!(
            "criterion 7 (mnist full-set): SKIP - MNIST IDX files not found under {} (set MJKAN_DATA_DIR)",
            data_dir().display()
        );
        return;
    };
    let train_meta = mjkan::data::load_idx(&opts.train_images, &opts.train_labels).expect("train idx");
    if train_meta.len() < 60_000 {
        println!(
            "criterion 7 (mnist full-set): SKIP - found only {} training samples; the 94.6%/95.9% gates are calibrated to the full 60k set (subset gate covered by the companion test)",
            train_meta.len()
        );
        return;
    }
    drop(train_meta);
    let _guard = heavy_lock();
    let started = Instant::now();
    let outcome = run_mnist(&opts).expect("mnist full run");
    let elapsed = started.elapsed().as_secs_f64();
    let mjkan_acc = outcome.mjkan.metric("test_accuracy").unwrap();
    let mlp_acc = outcome.mlp.metric("test_accuracy").unwrap();
    assert!(mjkan_acc >= 0.946, "mjkan accuracy {mjkan_acc:.4} below 0.946");
    assert!(mlp_acc >= 0.959, "mlp accuracy {mlp_acc:.4} below 0.959");
    assert!(elapsed < 1800.0, "full mnist took {elapsed:.0}s (budget 1800s)");
    println!(
        "criterion 7 (mnist full-set): PASS ({elapsed:.0}s, mjkan={mjkan_acc:.4} mlp={mlp_acc:.4})"
    );
}

#[test]
fn criterion_08_basis_size_overfitting_trend() {
    let _guard = heavy_lock();
    let started = Instant::now();
    let opts = BasisSweepOptions::default(); // noisy blobs, sd 1.2, 50/class, 4 classes
    let result = run_basis_sweep(&opts).expect("sweep runs");
    let elapsed = started.elapsed().as_secs_f64();
    let acc5 = result.test_accuracy("mjkan_5").unwrap();
    let acc50 = result.test_accuracy("mjkan_50").unwrap();
    let mlp = result.test_accuracy("mlp").unwrap();
    assert!(
        acc5 >= acc50,
        "small basis should generalize at least as well: K=5 {acc5:.4} < K=50 {acc50:.4}"
    );
    assert!(
        mlp >= acc50,
        "mlp baseline should match or beat the large-basis model: mlp {mlp:.4} < K=50 {acc50:.4}"
    );
    assert!(elapsed < 180.0, "basis sweep took {elapsed:.0}s (budget 180s)");
    println!(
        "criterion 8 (basis-size overfitting trend): PASS ({elapsed:.0}s, K=5 {acc5:.4} >= K=50 {acc50:.4}, mlp {mlp:.4})"
    );
}

#[test]
fn criterion_09_determinism() {
    let _guard = heavy_lock();
    // reduced configs exercise the same code paths as the full suites
    let reg_opts = RegressionSuiteOptions {
        k_list: vec![3],
        epochs: 60,
        grid_points: 120,
        ..RegressionSuiteOptions::default()
    };
    let a = run_regression_suite(&reg_opts).unwrap();
    let b = run_regression_suite(&reg_opts).unwrap();
    for ((task_a, vals_a, _), (task_b, vals_b, _)) in a.rows.iter().zip(&b.rows) {
        assert_eq!(task_a, task_b);
        for (x, y) in vals_a.iter().zip(vals_b) {
            assert!((x - y).abs() <= 1e-12, "{task_a}: {x} vs {y}");
        }
    }

    let sweep_opts = BasisSweepOptions {
        k_list: vec![2, 4],
        n_per_class: 20,
        epochs: 40,
        ..BasisSweepOptions::default()
    };
    let a = run_basis_sweep(&sweep_opts).unwrap();
    let b = run_basis_sweep(&sweep_opts).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.model, rb.model);
        assert!((ra.test_accuracy - rb.test_accuracy).abs() <= 1e-12);
        assert!((ra.train_accuracy - rb.train_accuracy).abs() <= 1e-12);
        assert_eq!(ra.config_hash, rb.config_hash);
    }

    // plain training runs reproduce their loss history exactly
    let cfg = TrainConfig {
        epochs: 25,
        batch_size: Some(16),
        seed: 11,
        optim: OptimSettings::default(),
        model: ModelSpec::Mjkan {
            hidden: vec![8],
            num_basis: 4,
            range_lo: -3.0,
            range_hi: 3.0,
            hidden_range: None,
            overlap: 1.0,
            use_base: true,
            base_nonlinear: false,
            squash: true,
            init_scale: 1.0,
        },
        loss: LossKind::SoftmaxCrossEntropy,
    };
    let splits = gen_classification(ClassificationKind::GaussianBlobs, 30, 3, 0.8, 4).unwrap();
    let data = TrainData::classification(&splits.train);
    let run = || {
        let mut model = build_model(&cfg.model, 2, 3, cfg.seed).unwrap();
        train(&mut model, &data, &cfg).unwrap().epoch_losses
    };
    let la = run();
    let lb = run();
    for (x, y) in la.iter().zip(&lb) {
        assert!((x - y).abs() <= 1e-12);
    }
    println!("criterion 9 (determinism of suite re-runs): PASS");
}

#[test]
fn criterion_10_optimizer_correctness() {
    use mjkan::optim::{AdamW, AdamWConfig};

    // single-scalar analytic steps
    let step_one = |cfg: AdamWConfig<f64>, p0: f64, g: f64| -> f64 {
        let mut opt = AdamW::new(cfg);
        let mut storage = vec![("p".to_string(), vec![p0])];
        let mut views: Vec<(String, &mut [f64])> = storage
            .iter_mut()
            .map(|(n, v)| (n.clone(), v.as_mut_slice()))
            .collect();
        let gv = vec![g];
        let grads: Vec<(String, &[f64])> = vec![("p".to_string(), gv.as_slice())];
        opt.step(&mut views, &grads).unwrap();
        storage[0].1[0]
    };
    let base = AdamWConfig::<f64>::default();

    // g = 0, wd = 0: unchanged
    let p = step_one(AdamWConfig { lr: 0.1, weight_decay: 0.0, ..base }, 1.25, 0.0);
    assert_eq!(p, 1.25);
    // g = 1, lr = 0.1, wd = 0, first step: update = -0.1/(1+eps)
    let p = step_one(AdamWConfig { lr: 0.1, weight_decay: 0.0, ..base }, 0.0, 1.0);
    assert!((p - (-0.1 / (1.0 + 1e-8))).abs() < 1e-15);
    // wd = 0.01, g = 0, p = 1, lr = 0.1: pure decoupled decay to 0.999
    let p = step_one(AdamWConfig { lr: 0.1, weight_decay: 0.01, ..base }, 1.0, 0.0);
    assert!((p - 0.999).abs() < 1e-15);

    // wd = 0 equals plain Adam elementwise over 100 steps on a random quadratic
    let (lr, b1, b2, eps) = (0.02, 0.9, 0.999, 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 9;
    let targets: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut ours: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut reference = ours.clone();
    let mut opt = AdamW::new(AdamWConfig { lr, beta1: b1, beta2: b2, eps, weight_decay: 0.0 });
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    for t in 1..=100i32 {
        let g: Vec<f64> = ours.iter().zip(&targets).map(|(p, t)| p - t).collect();
        let mut storage = vec![("p".to_string(), ours.clone())];
        let mut views: Vec<(String, &mut [f64])> = storage
            .iter_mut()
            .map(|(n, v)| (n.clone(), v.as_mut_slice()))
            .collect();
        let grads: Vec<(String, &[f64])> = vec![("p".to_string(), g.as_slice())];
        opt.step(&mut views, &grads).unwrap();
        ours = storage.remove(0).1;

        let g: Vec<f64> = reference.iter().zip(&targets).map(|(p, t)| p - t).collect();
        for i in 0..n {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / (1.0 - b1.powi(t));
            let v_hat = v[i] / (1.0 - b2.powi(t));
            reference[i] -= lr * (m_hat / (v_hat.sqrt() + eps));
        }
        assert_eq!(ours, reference, "divergence from Adam at step {t}");
    }
    println!("criterion 10 (optimizer correctness): PASS");
}

#[test]
fn criterion_06_paper_reference_values_for_orientation() {
    // Reference points from the published table, asserted only as recorded
    // constants (the tasks' closed forms are implementation-defined, so
    // absolute RMSEs are not reproduction targets).
    let table3_compositional = (0.4712, 0.2628); // (mlp128, mjkan_50)
    assert!(table3_compositional.1 < table3_compositional.0);
    let table3_step = (0.1082, 0.0638); // (mjkan_5, mjkan_50)
    assert!(table3_step.1 < table3_step.0);
    // CIFAR-10 basis trend from Table 2 for orientation
    let table2_cifar10 = [50.2, 45.3, 42.4, 40.0];
    assert!(table2_cifar10.windows(2).all(|w| w[0] >= w[1]));
    println!("criterion 6 reference values (orientation only): PASS");
}

#[test]
fn sanity_noise_free_blobs_all_models_at_ceiling() {
    let _guard = heavy_lock();
    // separable data: every model reaches at least 99% train accuracy
    let opts = BasisSweepOptions {
        k_list: vec![5, 50],
        noise_sd: 0.0,
        n_per_class: 25,
        epochs: 120,
        ..BasisSweepOptions::default()
    };
    let result = run_basis_sweep(&opts).expect("sweep runs");
    for row in &result.rows {
        assert!(
            row.train_accuracy >= 0.99,
            "{} train accuracy {:.4} below sanity floor",
            row.model,
            row.train_accuracy
        );
    }
    println!("sanity (noise-free blobs >= 99%): PASS");
}

#[test]
fn sanity_regression_grid_contract() {
    let task = gen_regression(RegressionTaskKind::HighFreqSine, 500).unwrap();
    assert_eq!(task.xs.len(), 500);
    assert_eq!(task.xs[0], -3.0);
    assert_eq!(*task.xs.last().unwrap(), 3.0);
    println!("sanity (regression grid): PASS");
}
