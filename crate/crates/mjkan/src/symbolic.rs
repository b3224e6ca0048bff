//! Closed-form per-feature contribution functions for models of shape
//! (MJKAN layer → linear head).
//!
//! For such a model every logit decomposes additively over input features:
//!
//! ```text
//! z_j(x) = bias_j + sum_i [ psi_{i,j}(x_i) + base_fold[i,j] * x_i ]
//! psi_{i,j}(x) = sum_k ( g_tilde[i,k,j] * phi_k(x) * x + b_tilde[i,k,j] * phi_k(x) )
//! ```
//!
//! where `g_tilde` and `b_tilde` are the layer's modulation tensors
//! contracted through the head weights, `base_fold` is the layer's affine
//! base branch folded through the head, and `bias` absorbs the head bias
//! plus the folded base bias. Evaluating the closed form reproduces the
//! network forward pass exactly.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{Layer, SequentialModel};
use crate::num::Scalar;
use crate::rbf::RbfBasis;
use crate::tensor::{Matrix, Tensor3};

/// Closed-form coefficients of an extractable model.
#[derive(Debug, Clone)]
pub struct SymbolicModel<F> {
    d_in: usize,
    class_count: usize,
    basis: RbfBasis<F>,
    /// Head bias plus the folded base bias, length `class_count`.
    bias: Vec<F>,
    /// `sum_h W[h,j] * gamma[i,k,h]`, shape `(d_in, K, class_count)`.
    g_tilde: Tensor3<F>,
    /// `sum_h W[h,j] * beta[i,k,h]`, shape `(d_in, K, class_count)`.
    b_tilde: Tensor3<F>,
    /// Base branch folded through the head, shape `(d_in, class_count)`.
    base_fold: Option<Matrix<F>>,
}

/// Extract the closed form from a model that is exactly
/// `[MjkanLayer, DenseLayer]`.
///
/// Anything else (stacked MJKAN layers, activations in between, a nonlinear
/// base variant) is rejected: the additive decomposition would not be exact.
pub fn extract<F: Scalar>(model: &SequentialModel<F>) -> Result<SymbolicModel<F>> {
    let layers = model.layers();
    if layers.len() != 2 {
        return Err(Error::NotExtractable(format!(
            "expected exactly [mjkan, dense], found {} layers",
            layers.len()
        )));
    }
    let mjkan = match &layers[0] {
        Layer::Mjkan(l) => l,
        other => {
            return Err(Error::NotExtractable(format!(
                "first layer must be mjkan, found {}",
                layer_kind_name(other)
            )))
        }
    };
    let head = match &layers[1] {
        Layer::Dense(l) => l,
        other => {
            return Err(Error::NotExtractable(format!(
                "second layer must be dense, found {}",
                layer_kind_name(other)
            )))
        }
    };
    if mjkan.base_nonlinear() {
        return Err(Error::NotExtractable(
            "mjkan layer uses the nonlinear base variant".into(),
        ));
    }

    let d_in = mjkan.d_in();
    let hidden = mjkan.d_out();
    let k = mjkan.num_basis();
    let class_count = head.d_out();
    let w = head.weight(); // (hidden, class_count)

    let contract = |src: &Tensor3<F>| -> Tensor3<F> {
        Tensor3::from_fn(d_in, k, class_count, |i, kk, j| {
            (0..hidden)
                .map(|h| w.get(h, j) * src.at(i, kk, h))
                .sum()
        })
    };
    let g_tilde = contract(mjkan.gamma());
    let b_tilde = contract(mjkan.beta());

    let mut bias: Vec<F> = head.bias().to_vec();
    let base_fold = if mjkan.use_base() {
        let bw = mjkan.base_weight().unwrap(); // (d_in, hidden)
        let folded = bw.dot(w)?; // (d_in, class_count)
        let bb = mjkan.base_bias().unwrap();
        for (j, out) in bias.iter_mut().enumerate() {
            let folded_bias: F = (0..hidden).map(|h| bb[h] * w.get(h, j)).sum();
            *out += folded_bias;
        }
        Some(folded)
    } else {
        None
    };

    Ok(SymbolicModel {
        d_in,
        class_count,
        basis: mjkan.basis().clone(),
        bias,
        g_tilde,
        b_tilde,
        base_fold,
    })
}

fn layer_kind_name<F>(layer: &Layer<F>) -> &'static str {
    match layer {
        Layer::Mjkan(_) => "mjkan",
        Layer::Dense(_) => "dense",
        Layer::Relu => "relu",
        Layer::Squash(_) => "squash",
    }
}

impl<F: Scalar> SymbolicModel<F> {
    #[inline]
    pub fn d_in(&self) -> usize {
        self.d_in
    }

    #[inline]
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    #[inline]
    pub fn basis(&self) -> &RbfBasis<F> {
        &self.basis
    }

    #[inline]
    pub fn bias(&self) -> &[F] {
        &self.bias
    }

    #[inline]
    pub fn g_tilde(&self) -> &Tensor3<F> {
        &self.g_tilde
    }

    #[inline]
    pub fn b_tilde(&self) -> &Tensor3<F> {
        &self.b_tilde
    }

    #[inline]
    pub fn base_fold(&self) -> Option<&Matrix<F>> {
        self.base_fold.as_ref()
    }

    fn check_indices(&self, feature: usize, class: usize) -> Result<()> {
        if feature >= self.d_in {
            return Err(Error::InvalidArgument(format!(
                "feature index {feature} out of range for d_in={}",
                self.d_in
            )));
        }
        if class >= self.class_count {
            return Err(Error::InvalidArgument(format!(
                "class index {class} out of range for class_count={}",
                self.class_count
            )));
        }
        Ok(())
    }

    /// Modulation-only contribution of `feature` to `class` at `x`.
    pub fn psi(&self, feature: usize, class: usize, x: F) -> Result<F> {
        self.check_indices(feature, class)?;
        let phi = self.basis.eval(x)?;
        let mut acc = F::zero();
        for (k, &p) in phi.iter().enumerate() {
            acc += self.g_tilde.at(feature, k, class) * p * x
                + self.b_tilde.at(feature, k, class) * p;
        }
        Ok(acc)
    }

    /// Total contribution of `feature` to `class` at `x`, including the
    /// folded base branch, so that
    /// `z_j = bias_j + sum_i psi_total(i, j, x_i)` exactly.
    pub fn psi_total(&self, feature: usize, class: usize, x: F) -> Result<F> {
        let mut v = self.psi(feature, class, x)?;
        if let Some(fold) = &self.base_fold {
            v += fold.get(feature, class) * x;
        }
        Ok(v)
    }

    /// Closed-form logits for a batch; matches the network forward pass.
    pub fn eval(&self, x: &Matrix<F>) -> Result<Matrix<F>> {
        if x.cols() != self.d_in {
            return Err(Error::shape("SymbolicModel::eval input", self.d_in, x.cols()));
        }
        if !x.all_finite() {
            return Err(Error::NonFinite("SymbolicModel::eval input".into()));
        }
        let n = x.rows();
        let mut out = Matrix::zeros(n, self.class_count);
        let mut phi = vec![F::zero(); self.basis.len()];
        for r in 0..n {
            let row = out.row_mut(r);
            row.copy_from_slice(&self.bias);
            for i in 0..self.d_in {
                let xi = x.get(r, i);
                self.basis.eval_into(xi, &mut phi);
                for j in 0..self.class_count {
                    let mut acc = F::zero();
                    for (k, &p) in phi.iter().enumerate() {
                        acc += self.g_tilde.at(i, k, j) * p * xi + self.b_tilde.at(i, k, j) * p;
                    }
                    if let Some(fold) = &self.base_fold {
                        acc += fold.get(i, j) * xi;
                    }
                    row[j] += acc;
                }
            }
        }
        Ok(out)
    }

    /// `(x, psi_total)` pairs over a grid.
    pub fn contributions(&self, feature: usize, class: usize, grid: &[F]) -> Result<Vec<(F, F)>> {
        self.check_indices(feature, class)?;
        grid.iter()
            .map(|&x| Ok((x, self.psi_total(feature, class, x)?)))
            .collect()
    }

    /// CSV rows `x,psi`, one per grid point.
    pub fn export_contributions(
        &self,
        feature: usize,
        class: usize,
        grid: &[F],
        out: &mut impl Write,
    ) -> Result<()> {
        let rows = self.contributions(feature, class, grid)?;
        writeln!(out, "x,psi")?;
        for (x, psi) in rows {
            writeln!(out, "{},{}", x.to_f64_lossy(), psi.to_f64_lossy())?;
        }
        Ok(())
    }

    /// CSV rows `feature,basis_index,class,g_tilde,b_tilde`, one per
    /// coefficient.
    pub fn export_coefficients(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "feature,basis_index,class,g_tilde,b_tilde")?;
        for i in 0..self.d_in {
            for k in 0..self.basis.len() {
                for j in 0..self.class_count {
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        i,
                        k,
                        j,
                        self.g_tilde.at(i, k, j).to_f64_lossy(),
                        self.b_tilde.at(i, k, j).to_f64_lossy()
                    )?;
                }
            }
        }
        Ok(())
    }
}
