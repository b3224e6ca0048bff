//! Dataset generation and ingestion: the five 1D regression targets,
//! synthetic classification sets for the basis-size sweep, IDX-format image
//! loading, and deterministic mini-batching.

use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// The five 1D regression targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegressionTaskKind {
    LocalBumps,
    GlobalPattern,
    StepFunction,
    HighFreqSine,
    Compositional,
}

pub const ALL_REGRESSION_TASKS: [RegressionTaskKind; 5] = [
    RegressionTaskKind::LocalBumps,
    RegressionTaskKind::GlobalPattern,
    RegressionTaskKind::StepFunction,
    RegressionTaskKind::HighFreqSine,
    RegressionTaskKind::Compositional,
];

impl RegressionTaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegressionTaskKind::LocalBumps => "local_bumps",
            RegressionTaskKind::GlobalPattern => "global_pattern",
            RegressionTaskKind::StepFunction => "step_function",
            RegressionTaskKind::HighFreqSine => "high_freq_sine",
            RegressionTaskKind::Compositional => "compositional",
        }
    }
}

impl FromStr for RegressionTaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local_bumps" => Ok(RegressionTaskKind::LocalBumps),
            "global_pattern" => Ok(RegressionTaskKind::GlobalPattern),
            "step_function" => Ok(RegressionTaskKind::StepFunction),
            "high_freq_sine" => Ok(RegressionTaskKind::HighFreqSine),
            "compositional" => Ok(RegressionTaskKind::Compositional),
            other => Err(Error::UnknownTask(other.to_string())),
        }
    }
}

/// Closed-form target value at `x`.
pub fn regression_target(kind: RegressionTaskKind, x: f64) -> f64 {
    match kind {
        RegressionTaskKind::LocalBumps => {
            const MU: [f64; 4] = [-2.0, -0.5, 1.0, 2.3];
            const A: [f64; 4] = [1.0, -0.8, 0.6, 0.9];
            const W: f64 = 0.15;
            MU.iter()
                .zip(&A)
                .map(|(&mu, &a)| a * (-(x - mu) * (x - mu) / (2.0 * W * W)).exp())
                .sum()
        }
        RegressionTaskKind::GlobalPattern => 0.5 * x + (2.0 * x).sin(),
        RegressionTaskKind::StepFunction => {
            if x < -1.0 {
                -1.0
            } else if x < 1.0 {
                0.0
            } else {
                1.5
            }
        }
        RegressionTaskKind::HighFreqSine => (20.0 * x).sin(),
        RegressionTaskKind::Compositional => (3.0 * x * x.cos()).sin() + 0.3 * x,
    }
}

/// A regression task sampled on the uniform inclusive grid over `[-3, 3]`.
#[derive(Debug, Clone)]
pub struct RegressionTask {
    pub kind: RegressionTaskKind,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl RegressionTask {
    /// Inputs as an `(N, 1)` matrix.
    pub fn x_matrix(&self) -> Matrix<f64> {
        Matrix::from_vec(self.xs.len(), 1, self.xs.clone()).unwrap()
    }

    /// Targets as an `(N, 1)` matrix.
    pub fn y_matrix(&self) -> Matrix<f64> {
        Matrix::from_vec(self.ys.len(), 1, self.ys.clone()).unwrap()
    }
}

pub const REGRESSION_RANGE: (f64, f64) = (-3.0, 3.0);
pub const REGRESSION_GRID_POINTS: usize = 500;

/// Noiseless samples of `kind` on the uniform inclusive `n`-point grid.
pub fn gen_regression(kind: RegressionTaskKind, n: usize) -> Result<RegressionTask> {
    if n < 2 {
        return Err(Error::InvalidArgument("regression grid needs at least 2 points".into()));
    }
    let (lo, hi) = REGRESSION_RANGE;
    let spacing = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + spacing * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| regression_target(kind, x)).collect();
    Ok(RegressionTask { kind, xs, ys })
}

/// Synthetic classification family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassificationKind {
    /// Class means on a circle of radius 2 with isotropic Gaussian noise.
    GaussianBlobs,
    /// Concentric annuli, one radius per class.
    NoisyRings,
}

impl FromStr for ClassificationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_blobs" => Ok(ClassificationKind::GaussianBlobs),
            "noisy_rings" => Ok(ClassificationKind::NoisyRings),
            other => Err(Error::UnknownTask(other.to_string())),
        }
    }
}

impl ClassificationKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassificationKind::GaussianBlobs => "gaussian_blobs",
            ClassificationKind::NoisyRings => "noisy_rings",
        }
    }
}

/// Labeled feature matrix.
#[derive(Debug, Clone)]
pub struct ClassificationSet {
    pub x: Matrix<f64>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl ClassificationSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows `indices` as a new set (used by mini-batching and subsetting).
    pub fn gather(&self, indices: &[usize]) -> ClassificationSet {
        let d = self.x.cols();
        let mut x = Matrix::zeros(indices.len(), d);
        let mut labels = Vec::with_capacity(indices.len());
        for (r, &i) in indices.iter().enumerate() {
            x.row_mut(r).copy_from_slice(self.x.row(i));
            labels.push(self.labels[i]);
        }
        ClassificationSet {
            x,
            labels,
            class_count: self.class_count,
        }
    }

    /// First `n` rows (deterministic subset mode).
    pub fn take(&self, n: usize) -> ClassificationSet {
        let n = n.min(self.len());
        let indices: Vec<usize> = (0..n).collect();
        self.gather(&indices)
    }
}

/// Train/val/test split of a generated set.
#[derive(Debug, Clone)]
pub struct ClassificationSplits {
    pub train: ClassificationSet,
    pub val: ClassificationSet,
    pub test: ClassificationSet,
}

/// Standard-normal sample via Box-Muller, driven by the given RNG.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Deterministic synthetic classification data with an 80/10/10 split.
pub fn gen_classification(
    kind: ClassificationKind,
    n_per_class: usize,
    class_count: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<ClassificationSplits> {
    if n_per_class == 0 {
        return Err(Error::InvalidArgument("n_per_class must be at least 1".into()));
    }
    if class_count < 2 {
        return Err(Error::InvalidArgument("class_count must be at least 2".into()));
    }
    if !noise_sd.is_finite() || noise_sd < 0.0 {
        return Err(Error::InvalidArgument("noise_sd must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_per_class * class_count;
    let mut x = Matrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    let mut row = 0usize;
    for c in 0..class_count {
        let angle = std::f64::consts::TAU * c as f64 / class_count as f64;
        for _ in 0..n_per_class {
            let (px, py) = match kind {
                ClassificationKind::GaussianBlobs => {
                    let (mx, my) = (2.0 * angle.cos(), 2.0 * angle.sin());
                    (mx + noise_sd * gauss(&mut rng), my + noise_sd * gauss(&mut rng))
                }
                ClassificationKind::NoisyRings => {
                    let radius = 1.0 + c as f64 + noise_sd * gauss(&mut rng);
                    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                    (radius * theta.cos(), radius * theta.sin())
                }
            };
            x.set(row, 0, px);
            x.set(row, 1, py);
            labels.push(c);
            row += 1;
        }
    }
    // shuffled 80/10/10 split
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_train = (n * 8) / 10;
    let n_val = n / 10;
    let all = ClassificationSet {
        x,
        labels,
        class_count,
    };
    Ok(ClassificationSplits {
        train: all.gather(&order[..n_train]),
        val: all.gather(&order[n_train..n_train + n_val]),
        test: all.gather(&order[n_train + n_val..]),
    })
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32_be(reader: &mut impl Read, path: &str, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader.read_exact(&mut buf).map_err(|_| Error::IdxTruncated {
        path: path.to_string(),
        detail: format!("missing {what}"),
    })?;
    Ok(u32::from_be_bytes(buf))
}

/// Load an IDX image/label file pair.
///
/// Pixels are scaled to `[-1, 1]` via `x -> x/127.5 - 1` and flattened
/// row-major to `rows*cols` features per image.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<ClassificationSet> {
    let images_name = images_path.display().to_string();
    let labels_name = labels_path.display().to_string();

    let mut img_file = File::open(images_path)?;
    let magic = read_u32_be(&mut img_file, &images_name, "magic")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::IdxMagic {
            path: images_name,
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = read_u32_be(&mut img_file, &images_name, "image count")? as usize;
    let rows = read_u32_be(&mut img_file, &images_name, "row count")? as usize;
    let cols = read_u32_be(&mut img_file, &images_name, "column count")? as usize;
    let mut pixels = vec![0u8; count * rows * cols];
    img_file
        .read_exact(&mut pixels)
        .map_err(|_| Error::IdxTruncated {
            path: images_name.clone(),
            detail: format!("expected {} pixel bytes", count * rows * cols),
        })?;

    let mut lbl_file = File::open(labels_path)?;
    let magic = read_u32_be(&mut lbl_file, &labels_name, "magic")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::IdxMagic {
            path: labels_name,
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let label_count = read_u32_be(&mut lbl_file, &labels_name, "label count")? as usize;
    if label_count != count {
        return Err(Error::IdxCountMismatch {
            images: count,
            labels: label_count,
        });
    }
    let mut raw_labels = vec![0u8; label_count];
    lbl_file
        .read_exact(&mut raw_labels)
        .map_err(|_| Error::IdxTruncated {
            path: labels_name,
            detail: format!("expected {label_count} label bytes"),
        })?;

    let d = rows * cols;
    let data: Vec<f64> = pixels.iter().map(|&b| b as f64 / 127.5 - 1.0).collect();
    let x = Matrix::from_vec(count, d, data)?;
    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize).collect();
    let class_count = labels.iter().copied().max().map_or(0, |m| m + 1);
    Ok(ClassificationSet {
        x,
        labels,
        class_count,
    })
}

/// Deterministic shuffled mini-batch schedule.
///
/// Each epoch visits every sample exactly once; the shuffle depends only on
/// `(seed, epoch)`. The final short batch is emitted.
#[derive(Debug, Clone)]
pub struct BatchIterator {
    n: usize,
    batch_size: usize,
    seed: u64,
    epoch: u64,
}

impl BatchIterator {
    pub fn new(n: usize, batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("cannot batch an empty set".into()));
        }
        Ok(BatchIterator {
            n,
            batch_size,
            seed,
            epoch: 0,
        })
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Index batches for a specific epoch, independent of the counter.
    pub fn epoch_batches(&self, epoch: u64) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ epoch.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        order.shuffle(&mut rng);
        order.chunks(self.batch_size).map(<[usize]>::to_vec).collect()
    }

    /// Batches for the current epoch; advances the epoch counter.
    pub fn next_epoch(&mut self) -> Vec<Vec<usize>> {
        let out = self.epoch_batches(self.epoch);
        self.epoch += 1;
        out
    }
}

/// Batch schedule over a classification set.
pub fn batches(set: &ClassificationSet, batch_size: usize, seed: u64) -> Result<BatchIterator> {
    BatchIterator::new(set.len(), batch_size, seed)
}
