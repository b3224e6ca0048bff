//! Command-line interface: training, evaluation, the experiment suites,
//! symbolic extraction, and parameter-count comparison.
//!
//! Machine-readable results go to stdout as `key=value` lines; progress and
//! prose go to stderr. Exit codes: 0 success, 1 runtime failure, 2 usage
//! error. Every value flag can also come from a `--config` file of flat
//! `key = value` lines; explicit flags win.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use mjkan::data::{ClassificationKind, RegressionTaskKind};
use mjkan::harness::{
    build_model, evaluate_accuracy, evaluate_rmse, run_basis_sweep, run_mnist,
    run_regression_suite, train, BasisSweepOptions, LossKind, MnistOptions, ModelSpec,
    OptimSettings, RegressionSuiteOptions, TrainConfig, TrainData,
};
use mjkan::{checkpoint, symbolic};

const DATA_DIR_ENV: &str = "MJKAN_DATA_DIR";

#[derive(Parser)]
#[command(
    name = "mjkan",
    about = "FiLM-modulated RBF networks: train, evaluate, run experiment suites, extract symbolic contributions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model on a 1D regression task and optionally save a checkpoint
    Train(TrainArgs),
    /// Evaluate a checkpoint on an IDX image/label pair
    Eval(EvalArgs),
    /// Run the function-regression sweep (5 tasks x models) and write a CSV table
    RegressSuite(RegressSuiteArgs),
    /// Train MJKAN and MLP on MNIST IDX files and report test accuracy
    Mnist(MnistArgs),
    /// Basis-size sweep on synthetic classification; writes an accuracy CSV
    BasisSweep(BasisSweepArgs),
    /// Extract closed-form per-feature contributions from a checkpoint
    Extract(ExtractArgs),
    /// Evaluate the KAN/MLP parameter-count formulas
    Paramcount(ParamcountArgs),
}

#[derive(Args)]
struct CommonConfig {
    /// Flat `key = value` config file; explicit flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Regression task: local_bumps, global_pattern, step_function,
    /// high_freq_sine, compositional
    #[arg(long)]
    task: Option<String>,
    /// Model family: mjkan or mlp [default: mjkan]
    #[arg(long)]
    model: Option<String>,
    /// Number of RBF basis functions per feature [default: 25]
    #[arg(long)]
    k: Option<usize>,
    /// Hidden widths, comma-separated [default: 64,64 for mjkan, 128 for mlp]
    #[arg(long)]
    hidden: Option<String>,
    /// Training epochs [default: 2000]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size; 0 trains full-batch [default: 0]
    #[arg(long)]
    batch_size: Option<usize>,
    /// RNG seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Learning rate [default: 1e-3]
    #[arg(long)]
    lr: Option<f64>,
    /// AdamW beta1 [default: 0.9]
    #[arg(long)]
    beta1: Option<f64>,
    /// AdamW beta2 [default: 0.999]
    #[arg(long)]
    beta2: Option<f64>,
    /// AdamW epsilon [default: 1e-8]
    #[arg(long)]
    eps: Option<f64>,
    /// Decoupled weight decay [default: 0.01]
    #[arg(long)]
    weight_decay: Option<f64>,
    /// Basis center range as lo:hi [default: -3:3]
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// Basis width as a multiple of center spacing [default: 1]
    #[arg(long)]
    overlap: Option<f64>,
    /// Disable the affine base branch [default: enabled]
    #[arg(long)]
    no_base: bool,
    /// Prepend the fixed smooth nonlinearity to the base branch [default: off]
    #[arg(long)]
    base_nonlinear: bool,
    /// Disable the bounded squashing before stacked MJKAN layers [default: enabled]
    #[arg(long)]
    no_squash: bool,
    /// Scale of the gamma initialization [default: 1]
    #[arg(long)]
    init_scale: Option<f64>,
    /// Write the trained model checkpoint here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the run manifest (key-value text) here
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Model checkpoint to evaluate
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
    /// IDX image file [default: $MJKAN_DATA_DIR/t10k-images-idx3-ubyte]
    #[arg(long, value_name = "FILE")]
    images: Option<PathBuf>,
    /// IDX label file [default: $MJKAN_DATA_DIR/t10k-labels-idx1-ubyte]
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct RegressSuiteArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Basis sizes to sweep, comma-separated [default: 5,10,25,50]
    #[arg(long)]
    k: Option<String>,
    /// Training epochs per run [default: 2000]
    #[arg(long)]
    epochs: Option<usize>,
    /// RNG seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the MLP128 baseline column [default: included]
    #[arg(long)]
    no_mlp: bool,
    /// Output CSV path (required)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MnistArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Training images IDX file [default: $MJKAN_DATA_DIR/train-images-idx3-ubyte]
    #[arg(long, value_name = "FILE")]
    images: Option<PathBuf>,
    /// Training labels IDX file [default: $MJKAN_DATA_DIR/train-labels-idx1-ubyte]
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,
    /// Test images IDX file [default: $MJKAN_DATA_DIR/t10k-images-idx3-ubyte]
    #[arg(long, value_name = "FILE")]
    test_images: Option<PathBuf>,
    /// Test labels IDX file [default: $MJKAN_DATA_DIR/t10k-labels-idx1-ubyte]
    #[arg(long, value_name = "FILE")]
    test_labels: Option<PathBuf>,
    /// Train on only the first N samples
    #[arg(long)]
    subset: Option<usize>,
    /// Training epochs [default: 10]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size [default: 128]
    #[arg(long)]
    batch_size: Option<usize>,
    /// RNG seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// MJKAN basis size [default: 5]
    #[arg(long)]
    k: Option<usize>,
    /// Hidden widths for both models [default: 128,128]
    #[arg(long)]
    hidden: Option<String>,
    /// Learning rate [default: 1e-3]
    #[arg(long)]
    lr: Option<f64>,
    /// Save the trained MJKAN checkpoint here
    #[arg(long, value_name = "FILE")]
    out_mjkan: Option<PathBuf>,
    /// Save the trained MLP checkpoint here
    #[arg(long, value_name = "FILE")]
    out_mlp: Option<PathBuf>,
}

#[derive(Args)]
struct BasisSweepArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Generator kind: gaussian_blobs or noisy_rings [default: gaussian_blobs]
    #[arg(long)]
    kind: Option<String>,
    /// Basis sizes to sweep, comma-separated [default: 5,10,25,50]
    #[arg(long)]
    k: Option<String>,
    /// Samples per class [default: 50]
    #[arg(long)]
    per_class: Option<usize>,
    /// Number of classes [default: 4]
    #[arg(long)]
    classes: Option<usize>,
    /// Noise standard deviation [default: 1.2]
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Training epochs per run [default: 300]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size [default: 32]
    #[arg(long)]
    batch_size: Option<usize>,
    /// RNG seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (required)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Model checkpoint; must be exactly [mjkan, dense]
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
    /// Input feature index for the contribution table
    #[arg(long)]
    feature: Option<usize>,
    /// Class (output) index for the contribution table
    #[arg(long)]
    class: Option<usize>,
    /// Evaluation grid as lo:hi:count, e.g. -3:3:100
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Output CSV for the (x, psi) contribution table
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output CSV for the full coefficient table
    #[arg(long, value_name = "FILE")]
    coeffs: Option<PathBuf>,
}

#[derive(Args)]
struct ParamcountArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// KAN layer dims as d_in,d_out (needs --grid and --order)
    #[arg(long)]
    kan: Option<String>,
    /// B-spline grid interval count G
    #[arg(long)]
    grid: Option<usize>,
    /// B-spline order K
    #[arg(long)]
    order: Option<usize>,
    /// Dense layer dims as d_in,d_out
    #[arg(long)]
    mlp: Option<String>,
}

/// Usage errors exit 2, runtime errors exit 1.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<mjkan::Error> for CliError {
    fn from(e: mjkan::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Values from a `--config` file. Every lookup marks the key as consumed;
/// leftovers are usage errors, mirroring the unknown-flag rule.
struct FileConfig {
    values: BTreeMap<String, String>,
    consumed: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    usage(format!(
                        "{}:{}: expected `key = value`",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(FileConfig {
            values,
            consumed: Default::default(),
        })
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => {
                self.consumed.borrow_mut().insert(key.to_string());
                raw.parse::<T>()
                    .map(Some)
                    .map_err(|_| usage(format!("config key `{key}`: cannot parse `{raw}`")))
            }
        }
    }

    fn finish(&self) -> CliResult<()> {
        let consumed = self.consumed.borrow();
        let unknown: Vec<&String> = self
            .values
            .keys()
            .filter(|k| !consumed.contains(*k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(usage(format!(
                "unknown config keys: {}",
                unknown
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }
}

fn parse_usize_list(s: &str, what: &str) -> CliResult<Vec<usize>> {
    let vals: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse()).collect();
    vals.map_err(|_| usage(format!("{what}: cannot parse `{s}` as a comma-separated list")))
}

fn parse_pair(s: &str, what: &str) -> CliResult<(usize, usize)> {
    let v = parse_usize_list(s, what)?;
    if v.len() != 2 {
        return Err(usage(format!("{what}: expected exactly two values, got `{s}`")));
    }
    Ok((v[0], v[1]))
}

fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(usage(format!("--range: expected lo:hi, got `{s}`")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("--range: bad number `{}`", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("--range: bad number `{}`", parts[1])))?;
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--grid: expected lo:hi:count, got `{s}`")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("--grid: bad number `{}`", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("--grid: bad number `{}`", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| usage(format!("--grid: bad count `{}`", parts[2])))?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

/// Resolve a dataset file: explicit flag, else config, else
/// `$MJKAN_DATA_DIR/<name>`, else usage error naming the flag.
fn resolve_data_file(
    flag: Option<PathBuf>,
    cfg: &FileConfig,
    key: &str,
    default_name: &str,
) -> CliResult<PathBuf> {
    if let Some(p) = flag {
        return Ok(p);
    }
    if let Some(p) = cfg.get::<PathBuf>(key)? {
        return Ok(p);
    }
    if let Ok(root) = std::env::var(DATA_DIR_ENV) {
        return Ok(PathBuf::from(root).join(default_name));
    }
    Err(usage(format!(
        "missing required --{key} (or set {DATA_DIR_ENV})"
    )))
}

fn optim_from(
    cfg: &FileConfig,
    lr: Option<f64>,
    beta1: Option<f64>,
    beta2: Option<f64>,
    eps: Option<f64>,
    weight_decay: Option<f64>,
) -> CliResult<OptimSettings> {
    let d = OptimSettings::default();
    Ok(OptimSettings {
        lr: lr.or(cfg.get("lr")?).unwrap_or(d.lr),
        beta1: beta1.or(cfg.get("beta1")?).unwrap_or(d.beta1),
        beta2: beta2.or(cfg.get("beta2")?).unwrap_or(d.beta2),
        eps: eps.or(cfg.get("eps")?).unwrap_or(d.eps),
        weight_decay: weight_decay
            .or(cfg.get("weight_decay")?)
            .unwrap_or(d.weight_decay),
    })
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let task_name: String = args
        .task
        .or(cfg.get("task")?)
        .ok_or_else(|| usage("missing required --task"))?;
    let task: RegressionTaskKind = task_name.parse()?;
    let model_name: String = args.model.or(cfg.get("model")?).unwrap_or_else(|| "mjkan".into());
    let k = args.k.or(cfg.get("k")?).unwrap_or(25);
    let epochs = args.epochs.or(cfg.get("epochs")?).unwrap_or(2000);
    let batch_size = args.batch_size.or(cfg.get("batch_size")?).unwrap_or(0);
    let seed = args.seed.or(cfg.get("seed")?).unwrap_or(0);
    let optim = optim_from(&cfg, args.lr, args.beta1, args.beta2, args.eps, args.weight_decay)?;
    let range = match args.range.or(cfg.get("range")?) {
        Some(s) => parse_range(&s)?,
        None => (-3.0, 3.0),
    };
    let overlap = args.overlap.or(cfg.get("overlap")?).unwrap_or(1.0);
    let init_scale = args.init_scale.or(cfg.get("init_scale")?).unwrap_or(1.0);
    let use_base = !(args.no_base || cfg.get::<bool>("no_base")?.unwrap_or(false));
    let base_nonlinear = args.base_nonlinear || cfg.get::<bool>("base_nonlinear")?.unwrap_or(false);
    let squash = !(args.no_squash || cfg.get::<bool>("no_squash")?.unwrap_or(false));
    let hidden_str: Option<String> = args.hidden.or(cfg.get("hidden")?);
    cfg.finish()?;

    let model_spec = match model_name.as_str() {
        "mjkan" => ModelSpec::Mjkan {
            hidden: match &hidden_str {
                Some(s) => parse_usize_list(s, "--hidden")?,
                None => vec![64, 64],
            },
            num_basis: k,
            range_lo: range.0,
            range_hi: range.1,
            hidden_range: None,
            overlap,
            use_base,
            base_nonlinear,
            squash,
            init_scale,
        },
        "mlp" => ModelSpec::Mlp {
            hidden: match &hidden_str {
                Some(s) => parse_usize_list(s, "--hidden")?,
                None => vec![128],
            },
        },
        other => return Err(usage(format!("unknown --model `{other}` (mjkan or mlp)"))),
    };

    let train_cfg = TrainConfig {
        epochs,
        batch_size: if batch_size == 0 { None } else { Some(batch_size) },
        seed,
        optim,
        model: model_spec,
        loss: LossKind::Mse,
    };

    eprintln!("training {model_name} on {} for {epochs} epochs", task.name());
    let data = mjkan::data::gen_regression(task, mjkan::data::REGRESSION_GRID_POINTS)?;
    let x = data.x_matrix();
    let y = data.y_matrix();
    let mut model = build_model(&train_cfg.model, 1, 1, train_cfg.seed)?;
    let mut result = train(&mut model, &TrainData::regression(x.clone(), y.clone()), &train_cfg)?;
    let final_rmse = evaluate_rmse(&model, &x, &y)?;
    result.final_metrics.push(("rmse".into(), final_rmse));

    if let Some(out) = &args.out {
        checkpoint::save_model(&model, out)?;
        println!("checkpoint={}", out.display());
    }
    if let Some(path) = &args.manifest {
        fs::write(path, result.manifest()).map_err(mjkan::Error::from)?;
        println!("manifest={}", path.display());
    }
    println!("task={}", task.name());
    println!("model={model_name}");
    println!("param_count={}", result.param_count);
    println!("config_hash={}", result.config_hash);
    if let Some(last) = result.epoch_losses.last() {
        println!("final_train_loss={last}");
    }
    println!("rmse={final_rmse}");
    println!("wall_secs={}", result.wall_secs);
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let ckpt: PathBuf = args
        .checkpoint
        .or(cfg.get("checkpoint")?)
        .ok_or_else(|| usage("missing required --checkpoint"))?;
    let images = resolve_data_file(args.images, &cfg, "images", "t10k-images-idx3-ubyte")?;
    let labels = resolve_data_file(args.labels, &cfg, "labels", "t10k-labels-idx1-ubyte")?;
    cfg.finish()?;

    let model = checkpoint::load_model(&ckpt)?;
    let set = mjkan::data::load_idx(&images, &labels)?;
    let acc = evaluate_accuracy(&model, &set)?;
    println!("samples={}", set.len());
    println!("accuracy={acc:.4}");
    Ok(())
}

fn cmd_regress_suite(args: RegressSuiteArgs) -> CliResult<()> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let k_list = match args.k.or(cfg.get("k")?) {
        Some(s) => parse_usize_list(&s, "--k")?,
        None => vec![5, 10, 25, 50],
    };
    let epochs = args.epochs.or(cfg.get("epochs")?).unwrap_or(2000);
    let seed = args.seed.or(cfg.get("seed")?).unwrap_or(0);
    let include_mlp = !(args.no_mlp || cfg.get::<bool>("no_mlp")?.unwrap_or(false));
    let out: PathBuf = args
        .out
        .or(cfg.get("out")?)
        .ok_or_else(|| usage("missing required --out"))?;
    cfg.finish()?;

    let opts = RegressionSuiteOptions {
        k_list,
        include_mlp128: include_mlp,
        epochs,
        seed,
        ..RegressionSuiteOptions::default()
    };
    eprintln!(
        "running regression suite: 5 tasks x {} models, {} epochs each",
        opts.k_list.len() + usize::from(opts.include_mlp128),
        opts.epochs
    );
    let result = run_regression_suite(&opts)?;
    fs::write(&out, result.to_csv()).map_err(mjkan::Error::from)?;
    println!("out={}", out.display());
    for (task, vals, _) in &result.rows {
        for (col, v) in result.columns.iter().zip(vals) {
            println!("rmse_{task}_{col}={v}");
        }
    }
    Ok(())
}

fn cmd_mnist(args: MnistArgs) -> CliResult<()> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let images = resolve_data_file(args.images, &cfg, "images", "train-images-idx3-ubyte")?;
    let labels = resolve_data_file(args.labels, &cfg, "labels", "train-labels-idx1-ubyte")?;
    let test_images =
        resolve_data_file(args.test_images, &cfg, "test_images", "t10k-images-idx3-ubyte")?;
    let test_labels =
        resolve_data_file(args.test_labels, &cfg, "test_labels", "t10k-labels-idx1-ubyte")?;
    let mut opts = MnistOptions::new(images, labels, test_images, test_labels);
    opts.subset = args.subset.or(cfg.get("subset")?);
    opts.epochs = args.epochs.or(cfg.get("epochs")?).unwrap_or(opts.epochs);
    opts.batch_size = args.batch_size.or(cfg.get("batch_size")?).unwrap_or(opts.batch_size);
    opts.seed = args.seed.or(cfg.get("seed")?).unwrap_or(opts.seed);
    opts.num_basis = args.k.or(cfg.get("k")?).unwrap_or(opts.num_basis);
    if let Some(lr) = args.lr.or(cfg.get("lr")?) {
        opts.optim.lr = lr;
    }
    if let Some(h) = args.hidden.or(cfg.get("hidden")?) {
        opts.hidden = parse_usize_list(&h, "--hidden")?;
    }
    cfg.finish()?;

    eprintln!(
        "mnist: training mjkan (K={}) and mlp, hidden {:?}, {} epochs",
        opts.num_basis, opts.hidden, opts.epochs
    );
    let outcome = run_mnist(&opts)?;
    println!("train_samples={}", outcome.train_len);
    println!("test_samples={}", outcome.test_len);
    for (tag, run) in [("mjkan", &outcome.mjkan), ("mlp", &outcome.mlp)] {
        println!("{tag}_param_count={}", run.param_count);
        println!("{tag}_config_hash={}", run.config_hash);
        println!(
            "{tag}_test_accuracy={:.4}",
            run.metric("test_accuracy").unwrap_or(f64::NAN)
        );
        println!(
            "{tag}_train_accuracy={:.4}",
            run.metric("train_accuracy").unwrap_or(f64::NAN)
        );
        println!("{tag}_wall_secs={:.2}", run.wall_secs);
    }

    if let Some(path) = &args.out_mjkan {
        checkpoint::save_model(&outcome.mjkan_model, path)?;
        println!("out_mjkan={}", path.display());
    }
    if let Some(path) = &args.out_mlp {
        checkpoint::save_model(&outcome.mlp_model, path)?;
        println!("out_mlp={}", path.display());
    }
    Ok(())
}

fn cmd_basis_sweep(args: BasisSweepArgs) -> CliResult<()> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let kind_name: String = args
        .kind
        .or(cfg.get("kind")?)
        .unwrap_or_else(|| "gaussian_blobs".into());
    let kind: ClassificationKind = kind_name.parse()?;
    let defaults = BasisSweepOptions::default();
    let opts = BasisSweepOptions {
        kind,
        k_list: match args.k.or(cfg.get("k")?) {
            Some(s) => parse_usize_list(&s, "--k")?,
            None => defaults.k_list.clone(),
        },
        n_per_class: args.per_class.or(cfg.get("per_class")?).unwrap_or(defaults.n_per_class),
        class_count: args.classes.or(cfg.get("classes")?).unwrap_or(defaults.class_count),
        noise_sd: args.noise_sd.or(cfg.get("noise_sd")?).unwrap_or(defaults.noise_sd),
        epochs: args.epochs.or(cfg.get("epochs")?).unwrap_or(defaults.epochs),
        batch_size: args.batch_size.or(cfg.get("batch_size")?).unwrap_or(defaults.batch_size),
        seed: args.seed.or(cfg.get("seed")?).unwrap_or(defaults.seed),
        ..defaults
    };
    let out: PathBuf = args
        .out
        .or(cfg.get("out")?)
        .ok_or_else(|| usage("missing required --out"))?;
    cfg.finish()?;

    eprintln!(
        "basis sweep on {}: K in {:?} plus mlp baseline",
        kind.name(),
        opts.k_list
    );
    let result = run_basis_sweep(&opts)?;
    fs::write(&out, result.to_csv()).map_err(mjkan::Error::from)?;
    println!("out={}", out.display());
    for row in &result.rows {
        println!("test_accuracy_{}={:.4}", row.model, row.test_accuracy);
    }
    Ok(())
}

fn cmd_extract(args: ExtractArgs) -> CliResult<()> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let ckpt: PathBuf = args
        .checkpoint
        .or(cfg.get("checkpoint")?)
        .ok_or_else(|| usage("missing required --checkpoint"))?;
    let feature = args.feature.or(cfg.get("feature")?);
    let class = args.class.or(cfg.get("class")?);
    let grid = args.grid.or(cfg.get("grid")?);
    let out: Option<PathBuf> = match args.out {
        Some(p) => Some(p),
        None => cfg.get("out")?,
    };
    let coeffs: Option<PathBuf> = match args.coeffs {
        Some(p) => Some(p),
        None => cfg.get("coeffs")?,
    };
    cfg.finish()?;

    if out.is_none() && coeffs.is_none() {
        return Err(usage("nothing to do: pass --out (with --feature/--class/--grid) or --coeffs"));
    }

    let model = checkpoint::load_model(&ckpt)?;
    let sym = symbolic::extract(&model)?;

    if let Some(out) = out {
        let feature = feature.ok_or_else(|| usage("missing required --feature"))?;
        let class = class.ok_or_else(|| usage("missing required --class"))?;
        let grid_spec = grid.ok_or_else(|| usage("missing required --grid (lo:hi:count)"))?;
        let points = parse_grid(&grid_spec)?;
        let mut buf = Vec::new();
        sym.export_contributions(feature, class, &points, &mut buf)?;
        fs::write(&out, buf).map_err(mjkan::Error::from)?;
        println!("out={}", out.display());
        println!("rows={}", points.len());
    }
    if let Some(coeffs) = coeffs {
        let mut buf = Vec::new();
        sym.export_coefficients(&mut buf)?;
        fs::write(&coeffs, buf).map_err(mjkan::Error::from)?;
        println!("coeffs={}", coeffs.display());
    }
    Ok(())
}

fn cmd_paramcount(args: ParamcountArgs) -> CliResult<()> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let kan = match args.kan {
        Some(s) => Some(s),
        None => cfg.get("kan")?,
    };
    let mlp = match args.mlp {
        Some(s) => Some(s),
        None => cfg.get("mlp")?,
    };
    let grid = args.grid.or(cfg.get("grid")?);
    let order = args.order.or(cfg.get("order")?);
    cfg.finish()?;

    if kan.is_none() && mlp.is_none() {
        return Err(usage("nothing to do: pass --kan d_in,d_out (with --grid/--order) or --mlp d_in,d_out"));
    }
    if let Some(kan) = kan {
        let (d_in, d_out) = parse_pair(&kan, "--kan")?;
        let grid = grid.ok_or_else(|| usage("missing required --grid"))?;
        let order = order.ok_or_else(|| usage("missing required --order"))?;
        println!("params_kan={}", mjkan::kan_param_count(d_in, d_out, grid, order));
    }
    if let Some(mlp) = mlp {
        let (d_in, d_out) = parse_pair(&mlp, "--mlp")?;
        println!("params_mlp={}", mjkan::mlp_param_count(d_in, d_out));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::RegressSuite(a) => cmd_regress_suite(a),
        Command::Mnist(a) => cmd_mnist(a),
        Command::BasisSweep(a) => cmd_basis_sweep(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Paramcount(a) => cmd_paramcount(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
