//! Gaussian radial-basis expansion of a scalar feature, with analytic
//! derivatives.
//!
//! A basis holds `K` centers `c_k` on a fixed interval and a shared width
//! `sigma`; evaluating at `x` yields the vector `phi_k(x) =
//! exp(-(x - c_k)^2 / (2 sigma^2))`. Centers and width are constants: no
//! gradient flows into them.

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::tensor::{Matrix, Tensor3};

/// Basis function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Gaussian bumps; the normal case.
    Gaussian,
    /// Every basis function is identically 1 (derivative 0). Test hook for
    /// the linear-reduction invariant.
    ConstantOne,
}

/// `K` Gaussian centers plus a shared width over a fixed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfBasis<F> {
    centers: Vec<F>,
    sigma: F,
    range_lo: F,
    range_hi: F,
    kind: BasisKind,
}

impl<F: Scalar> RbfBasis<F> {
    /// Uniform inclusive grid of `k` centers over `[range_lo, range_hi]`.
    ///
    /// For `k == 1` the single center is the interval midpoint. The shared
    /// width is `overlap * spacing`, where `spacing` is the grid step for
    /// `k >= 2` and half the interval for `k == 1`.
    pub fn new_uniform(k: usize, range_lo: F, range_hi: F, overlap: F) -> Result<Self> {
        Self::build(k, range_lo, range_hi, overlap, BasisKind::Gaussian)
    }

    /// Same center layout, but `eval` returns all ones and
    /// `eval_derivative` all zeros.
    pub fn constant_one(k: usize, range_lo: F, range_hi: F) -> Result<Self> {
        Self::build(k, range_lo, range_hi, F::one(), BasisKind::ConstantOne)
    }

    fn build(k: usize, range_lo: F, range_hi: F, overlap: F, kind: BasisKind) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("basis size K must be at least 1".into()));
        }
        if !range_lo.is_finite() || !range_hi.is_finite() {
            return Err(Error::InvalidArgument("basis range must be finite".into()));
        }
        if range_lo >= range_hi {
            return Err(Error::InvalidArgument(format!(
                "basis range is empty: [{}, {}]",
                range_lo, range_hi
            )));
        }
        if !(overlap > F::zero()) || !overlap.is_finite() {
            return Err(Error::InvalidArgument("overlap must be a positive real".into()));
        }
        let width = range_hi - range_lo;
        let (centers, spacing) = if k == 1 {
            (vec![range_lo + width / F::c(2.0)], width / F::c(2.0))
        } else {
            let spacing = width / F::from_usize(k - 1).unwrap();
            let centers = (0..k)
                .map(|i| range_lo + spacing * F::from_usize(i).unwrap())
                .collect();
            (centers, spacing)
        };
        Ok(RbfBasis {
            centers,
            sigma: overlap * spacing,
            range_lo,
            range_hi,
            kind,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // K >= 1 by construction
    }

    #[inline]
    pub fn centers(&self) -> &[F] {
        &self.centers
    }

    #[inline]
    pub fn sigma(&self) -> F {
        self.sigma
    }

    #[inline]
    pub fn range(&self) -> (F, F) {
        (self.range_lo, self.range_hi)
    }

    #[inline]
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Basis activations at `x`; one entry per center, each in `(0, 1]`.
    pub fn eval(&self, x: F) -> Result<Vec<F>> {
        if !x.is_finite() {
            return Err(Error::NonFinite("RbfBasis::eval input".into()));
        }
        let mut out = vec![F::zero(); self.len()];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    /// Analytic derivative of each activation at `x`:
    /// `phi_k'(x) = -(x - c_k)/sigma^2 * phi_k(x)`.
    pub fn eval_derivative(&self, x: F) -> Result<Vec<F>> {
        if !x.is_finite() {
            return Err(Error::NonFinite("RbfBasis::eval_derivative input".into()));
        }
        let mut out = vec![F::zero(); self.len()];
        self.eval_derivative_into(x, &mut out);
        Ok(out)
    }

    /// Non-allocating `eval`; `x` assumed finite.
    #[inline]
    pub(crate) fn eval_into(&self, x: F, out: &mut [F]) {
        debug_assert_eq!(out.len(), self.len());
        match self.kind {
            BasisKind::ConstantOne => out.fill(F::one()),
            BasisKind::Gaussian => {
                let inv_two_sigma_sq = (F::c(2.0) * self.sigma * self.sigma).recip();
                for (o, &c) in out.iter_mut().zip(&self.centers) {
                    let d = x - c;
                    *o = (-d * d * inv_two_sigma_sq).exp();
                }
            }
        }
    }

    /// Non-allocating `eval_derivative`; `x` assumed finite.
    #[inline]
    pub(crate) fn eval_derivative_into(&self, x: F, out: &mut [F]) {
        debug_assert_eq!(out.len(), self.len());
        match self.kind {
            BasisKind::ConstantOne => out.fill(F::zero()),
            BasisKind::Gaussian => {
                let inv_sigma_sq = (self.sigma * self.sigma).recip();
                let inv_two_sigma_sq = inv_sigma_sq / F::c(2.0);
                for (o, &c) in out.iter_mut().zip(&self.centers) {
                    let d = x - c;
                    let phi = (-d * d * inv_two_sigma_sq).exp();
                    *o = -d * inv_sigma_sq * phi;
                }
            }
        }
    }

    /// Given a cached activation `phi_k(x)`, its derivative without
    /// re-evaluating the exponential.
    #[inline]
    pub(crate) fn derivative_from_phi(&self, x: F, k: usize, phi: F) -> F {
        match self.kind {
            BasisKind::ConstantOne => F::zero(),
            BasisKind::Gaussian => -(x - self.centers[k]) / (self.sigma * self.sigma) * phi,
        }
    }

    /// Expand every entry of a batch: output shape `(N, d, K)`.
    pub fn eval_batch(&self, xs: &Matrix<F>) -> Result<Tensor3<F>> {
        if xs.rows() == 0 || xs.cols() == 0 {
            return Err(Error::InvalidArgument("eval_batch: empty input matrix".into()));
        }
        if !xs.all_finite() {
            return Err(Error::NonFinite("RbfBasis::eval_batch input".into()));
        }
        let (n, d) = xs.shape();
        let mut out = Tensor3::zeros(n, d, self.len());
        for row in 0..n {
            for col in 0..d {
                let x = xs.get(row, col);
                self.eval_into(x, out.inner_mut(row, col));
            }
        }
        Ok(out)
    }
}
