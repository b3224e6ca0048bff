//! Losses with exact gradients, and the accuracy metric.

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::tensor::Matrix;

/// Mean squared error over all entries, with the gradient w.r.t. `pred`.
pub fn mse<F: Scalar>(pred: &Matrix<F>, target: &Matrix<F>) -> Result<(F, Matrix<F>)> {
    if pred.shape() != target.shape() {
        return Err(Error::shape(
            "mse",
            format!("{:?}", target.shape()),
            format!("{:?}", pred.shape()),
        ));
    }
    let count = F::from_usize(pred.data().len()).unwrap();
    let mut loss = F::zero();
    let mut grad = pred.clone();
    for (g, &t) in grad.data_mut().iter_mut().zip(target.data()) {
        let diff = *g - t;
        loss += diff * diff;
        *g = F::c(2.0) * diff / count;
    }
    Ok((loss / count, grad))
}

/// Root mean squared error.
pub fn rmse<F: Scalar>(pred: &Matrix<F>, target: &Matrix<F>) -> Result<F> {
    Ok(mse(pred, target)?.0.sqrt())
}

/// Numerically stable softmax cross-entropy, mean over the batch, with the
/// gradient `(softmax - onehot) / N` w.r.t. the logits.
pub fn softmax_cross_entropy<F: Scalar>(
    logits: &Matrix<F>,
    labels: &[usize],
) -> Result<(F, Matrix<F>)> {
    let (n, c) = logits.shape();
    if labels.len() != n {
        return Err(Error::shape("softmax_cross_entropy labels", n, labels.len()));
    }
    for &l in labels {
        if l >= c {
            return Err(Error::LabelOutOfRange { label: l, classes: c });
        }
    }
    let inv_n = F::from_usize(n).unwrap().recip();
    let mut grad = Matrix::zeros(n, c);
    let mut loss = F::zero();
    for r in 0..n {
        let row = logits.row(r);
        let max = row.iter().copied().fold(F::neg_infinity(), F::max);
        let mut sum = F::zero();
        for &v in row {
            sum += (v - max).exp();
        }
        let log_sum = sum.ln() + max;
        loss += log_sum - row[labels[r]];
        let g = grad.row_mut(r);
        for (j, &v) in row.iter().enumerate() {
            g[j] = (v - log_sum).exp() * inv_n;
        }
        g[labels[r]] -= inv_n;
    }
    Ok((loss * inv_n, grad))
}

/// Row-wise softmax (test and inspection helper).
pub fn softmax_rows<F: Scalar>(logits: &Matrix<F>) -> Matrix<F> {
    let (n, c) = logits.shape();
    let mut out = Matrix::zeros(n, c);
    for r in 0..n {
        let row = logits.row(r);
        let max = row.iter().copied().fold(F::neg_infinity(), F::max);
        let mut sum = F::zero();
        for &v in row {
            sum += (v - max).exp();
        }
        let o = out.row_mut(r);
        for (j, &v) in row.iter().enumerate() {
            o[j] = (v - max).exp() / sum;
        }
    }
    out
}

/// Fraction of rows whose argmax equals the label; ties break toward the
/// lowest class index.
pub fn accuracy<F: Scalar>(logits: &Matrix<F>, labels: &[usize]) -> Result<f64> {
    let (n, c) = logits.shape();
    if labels.len() != n {
        return Err(Error::shape("accuracy labels", n, labels.len()));
    }
    for &l in labels {
        if l >= c {
            return Err(Error::LabelOutOfRange { label: l, classes: c });
        }
    }
    let mut hits = 0usize;
    for r in 0..n {
        let row = logits.row(r);
        let mut best = 0usize;
        for (j, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = j;
            }
        }
        if best == labels[r] {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}
