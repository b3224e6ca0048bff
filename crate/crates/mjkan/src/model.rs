//! Dense layers, fixed activations, and the sequential container that
//! composes them with MJKAN layers under one forward/backward contract.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layer::{ForwardCache, MjkanGrads, MjkanLayer};
use crate::num::Scalar;
use crate::tensor::Matrix;

/// Plain affine layer `Y = X W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<F> {
    w: Matrix<F>,
    b: Vec<F>,
}

#[derive(Debug, Clone)]
pub struct DenseGrads<F> {
    pub w: Matrix<F>,
    pub b: Vec<F>,
}

impl<F: Scalar> DenseLayer<F> {
    /// Weights uniform in `[-1/sqrt(d_in), 1/sqrt(d_in)]`, zero bias,
    /// fully determined by `seed`.
    pub fn init(d_in: usize, d_out: usize, seed: u64) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidArgument(format!(
                "dense dims must be positive, got {}x{}",
                d_in, d_out
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (d_in as f64).sqrt();
        let w = Matrix::from_fn(d_in, d_out, |_, _| F::c(rng.gen_range(-bound..=bound)));
        Ok(DenseLayer {
            w,
            b: vec![F::zero(); d_out],
        })
    }

    pub fn from_parts(w: Matrix<F>, b: Vec<F>) -> Result<Self> {
        if b.len() != w.cols() {
            return Err(Error::shape("DenseLayer::from_parts bias", w.cols(), b.len()));
        }
        if !w.all_finite() || !b.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("DenseLayer parameters".into()));
        }
        Ok(DenseLayer { w, b })
    }

    #[inline]
    pub fn d_in(&self) -> usize {
        self.w.rows()
    }

    #[inline]
    pub fn d_out(&self) -> usize {
        self.w.cols()
    }

    #[inline]
    pub fn weight(&self) -> &Matrix<F> {
        &self.w
    }

    #[inline]
    pub fn bias(&self) -> &[F] {
        &self.b
    }

    pub fn weight_mut(&mut self) -> &mut Matrix<F> {
        &mut self.w
    }

    pub fn bias_mut(&mut self) -> &mut Vec<F> {
        &mut self.b
    }

    /// Simultaneous mutable access to both parameter blocks (optimizer hook).
    pub fn split_params_mut(&mut self) -> (&mut Matrix<F>, &mut Vec<F>) {
        (&mut self.w, &mut self.b)
    }

    pub fn param_count(&self) -> usize {
        self.w.rows() * self.w.cols() + self.b.len()
    }

    pub fn forward(&self, x: &Matrix<F>) -> Result<(Matrix<F>, Matrix<F>)> {
        if x.cols() != self.d_in() {
            return Err(Error::shape("DenseLayer::forward input", self.d_in(), x.cols()));
        }
        let mut y = x.dot(&self.w)?;
        y.add_row_vector(&self.b);
        Ok((y, x.clone()))
    }

    pub fn backward(&self, x: &Matrix<F>, d_y: &Matrix<F>) -> Result<(DenseGrads<F>, Matrix<F>)> {
        self.backward_opts(x, d_y, true)
    }

    pub(crate) fn backward_opts(
        &self,
        x: &Matrix<F>,
        d_y: &Matrix<F>,
        compute_dx: bool,
    ) -> Result<(DenseGrads<F>, Matrix<F>)> {
        if d_y.shape() != (x.rows(), self.d_out()) {
            return Err(Error::shape(
                "DenseLayer::backward dY",
                format!("{:?}", (x.rows(), self.d_out())),
                format!("{:?}", d_y.shape()),
            ));
        }
        let dw = x.t_dot(d_y)?;
        let db = d_y.col_sums();
        let dx = if compute_dx {
            d_y.dot_t(&self.w)?
        } else {
            Matrix::zeros(x.rows(), self.d_in())
        };
        Ok((DenseGrads { w: dw, b: db }, dx))
    }
}

/// Elementwise `max(0, x)`; subgradient 0 at exactly 0.
pub fn relu_forward<F: Scalar>(x: &Matrix<F>) -> (Matrix<F>, Matrix<F>) {
    (x.map(|v| v.max(F::zero())), x.clone())
}

pub fn relu_backward<F: Scalar>(x: &Matrix<F>, d_y: &Matrix<F>) -> Result<Matrix<F>> {
    if x.shape() != d_y.shape() {
        return Err(Error::shape(
            "relu_backward",
            format!("{:?}", x.shape()),
            format!("{:?}", d_y.shape()),
        ));
    }
    let mut dx = d_y.clone();
    for (g, &xi) in dx.data_mut().iter_mut().zip(x.data()) {
        if xi <= F::zero() {
            *g = F::zero();
        }
    }
    Ok(dx)
}

/// Bounded tanh-shaped squashing, scaled to an interval.
///
/// `s(x) = m + h * tanh((x - m)/h)` with `m` the interval midpoint and `h`
/// its half-width, so outputs stay inside the interval and `s(x) ~ x` near
/// the middle. Inserted before stacked MJKAN layers to keep hidden
/// activations inside the basis support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squash<F> {
    center: F,
    half_width: F,
}

impl<F: Scalar> Squash<F> {
    pub fn new(range_lo: F, range_hi: F) -> Result<Self> {
        if !(range_lo < range_hi) || !range_lo.is_finite() || !range_hi.is_finite() {
            return Err(Error::InvalidArgument("squash range must be finite and non-empty".into()));
        }
        Ok(Squash {
            center: (range_lo + range_hi) / F::c(2.0),
            half_width: (range_hi - range_lo) / F::c(2.0),
        })
    }

    pub fn center(&self) -> F {
        self.center
    }

    pub fn half_width(&self) -> F {
        self.half_width
    }

    pub fn forward(&self, x: &Matrix<F>) -> (Matrix<F>, Matrix<F>) {
        let (m, h) = (self.center, self.half_width);
        (x.map(|v| m + h * ((v - m) / h).tanh()), x.clone())
    }

    pub fn backward(&self, x: &Matrix<F>, d_y: &Matrix<F>) -> Result<Matrix<F>> {
        if x.shape() != d_y.shape() {
            return Err(Error::shape(
                "Squash::backward",
                format!("{:?}", x.shape()),
                format!("{:?}", d_y.shape()),
            ));
        }
        let (m, h) = (self.center, self.half_width);
        let mut dx = d_y.clone();
        for (g, &xi) in dx.data_mut().iter_mut().zip(x.data()) {
            let t = ((xi - m) / h).tanh();
            *g = *g * (F::one() - t * t);
        }
        Ok(dx)
    }
}

/// One layer of a [`SequentialModel`].
#[derive(Debug, Clone)]
pub enum Layer<F> {
    Mjkan(MjkanLayer<F>),
    Dense(DenseLayer<F>),
    Relu,
    Squash(Squash<F>),
}

impl<F: Scalar> Layer<F> {
    /// `(d_in, d_out)` for dimension-fixing layers, `None` for passthrough.
    fn dims(&self) -> Option<(usize, usize)> {
        match self {
            Layer::Mjkan(l) => Some((l.d_in(), l.d_out())),
            Layer::Dense(l) => Some((l.d_in(), l.d_out())),
            Layer::Relu | Layer::Squash(_) => None,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Layer::Mjkan(l) => l.param_count(),
            Layer::Dense(l) => l.param_count(),
            Layer::Relu | Layer::Squash(_) => 0,
        }
    }
}

/// Per-layer cache from a forward pass.
#[derive(Debug, Clone)]
pub enum LayerCache<F> {
    Mjkan(ForwardCache<F>),
    Dense(Matrix<F>),
    Relu(Matrix<F>),
    Squash(Matrix<F>),
}

/// Per-layer gradients from a backward pass. Parameter-free layers yield
/// `None`.
#[derive(Debug, Clone)]
pub enum LayerGrads<F> {
    Mjkan(MjkanGrads<F>),
    Dense(DenseGrads<F>),
    None,
}

/// Gradients for a whole model, aligned with its layer list.
#[derive(Debug, Clone)]
pub struct ModelGrads<F> {
    pub layers: Vec<LayerGrads<F>>,
}

impl<F: Scalar> ModelGrads<F> {
    /// Flat named parameter blocks, in model order.
    pub fn blocks(&self) -> Vec<(String, &[F])> {
        let mut out = Vec::new();
        for (idx, lg) in self.layers.iter().enumerate() {
            match lg {
                LayerGrads::Mjkan(g) => {
                    out.push((format!("layer{idx}.gamma"), g.gamma.data()));
                    out.push((format!("layer{idx}.beta"), g.beta.data()));
                    if let Some(w) = &g.base_weight {
                        out.push((format!("layer{idx}.base_weight"), w.data()));
                    }
                    if let Some(b) = &g.base_bias {
                        out.push((format!("layer{idx}.base_bias"), b.as_slice()));
                    }
                }
                LayerGrads::Dense(g) => {
                    out.push((format!("layer{idx}.weight"), g.w.data()));
                    out.push((format!("layer{idx}.bias"), g.b.as_slice()));
                }
                LayerGrads::None => {}
            }
        }
        out
    }
}

/// Ordered list of layers with validated dimension chaining.
#[derive(Debug, Clone)]
pub struct SequentialModel<F> {
    layers: Vec<Layer<F>>,
}

impl<F: Scalar> SequentialModel<F> {
    /// Builds the model, rejecting dimension chain mismatches up front.
    pub fn new(layers: Vec<Layer<F>>) -> Result<Self> {
        let mut width: Option<usize> = None;
        for (idx, layer) in layers.iter().enumerate() {
            if let Some((d_in, d_out)) = layer.dims() {
                if let Some(w) = width {
                    if w != d_in {
                        return Err(Error::shape(
                            format!("SequentialModel layer {idx} input"),
                            w,
                            d_in,
                        ));
                    }
                }
                width = Some(d_out);
            }
        }
        Ok(SequentialModel { layers })
    }

    #[inline]
    pub fn layers(&self) -> &[Layer<F>] {
        &self.layers
    }

    #[inline]
    pub fn layers_mut(&mut self) -> &mut [Layer<F>] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Input width of the first dimension-fixing layer, if any.
    pub fn d_in(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| l.dims().map(|(i, _)| i))
    }

    /// Output width of the last dimension-fixing layer, if any.
    pub fn d_out(&self) -> Option<usize> {
        self.layers.iter().rev().find_map(|l| l.dims().map(|(_, o)| o))
    }

    pub fn forward(&self, x: &Matrix<F>) -> Result<(Matrix<F>, Vec<LayerCache<F>>)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = match layer {
                Layer::Mjkan(l) => {
                    let (y, c) = l.forward(&cur)?;
                    caches.push(LayerCache::Mjkan(c));
                    y
                }
                Layer::Dense(l) => {
                    let (y, c) = l.forward(&cur)?;
                    caches.push(LayerCache::Dense(c));
                    y
                }
                Layer::Relu => {
                    let (y, c) = relu_forward(&cur);
                    caches.push(LayerCache::Relu(c));
                    y
                }
                Layer::Squash(s) => {
                    let (y, c) = s.forward(&cur);
                    caches.push(LayerCache::Squash(c));
                    y
                }
            };
        }
        Ok((cur, caches))
    }

    /// Reverse traversal applying each layer's exact backward rule.
    pub fn backward(
        &self,
        caches: &[LayerCache<F>],
        d_y: &Matrix<F>,
    ) -> Result<(ModelGrads<F>, Matrix<F>)> {
        self.backward_with(caches, d_y, true)
    }

    /// As [`backward`](Self::backward); with `input_grad` false the first
    /// layer skips computing its input gradient (the returned `dX` is then
    /// zeros). Training uses this since data gradients are never needed.
    pub fn backward_with(
        &self,
        caches: &[LayerCache<F>],
        d_y: &Matrix<F>,
        input_grad: bool,
    ) -> Result<(ModelGrads<F>, Matrix<F>)> {
        if caches.len() != self.layers.len() {
            return Err(Error::shape(
                "SequentialModel::backward caches",
                self.layers.len(),
                caches.len(),
            ));
        }
        let mut grads: Vec<LayerGrads<F>> = Vec::with_capacity(self.layers.len());
        let mut cur = d_y.clone();
        for (idx, (layer, cache)) in self.layers.iter().zip(caches).enumerate().rev() {
            let compute_dx = input_grad || idx > 0;
            let lg;
            (lg, cur) = match (layer, cache) {
                (Layer::Mjkan(l), LayerCache::Mjkan(c)) => {
                    let (g, dx) = l.backward_opts(c, &cur, compute_dx)?;
                    (LayerGrads::Mjkan(g), dx)
                }
                (Layer::Dense(l), LayerCache::Dense(c)) => {
                    let (g, dx) = l.backward_opts(c, &cur, compute_dx)?;
                    (LayerGrads::Dense(g), dx)
                }
                (Layer::Relu, LayerCache::Relu(c)) => (LayerGrads::None, relu_backward(c, &cur)?),
                (Layer::Squash(s), LayerCache::Squash(c)) => {
                    (LayerGrads::None, s.backward(c, &cur)?)
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "cache does not match model layer kinds".into(),
                    ))
                }
            };
            grads.push(lg);
        }
        grads.reverse();
        Ok((ModelGrads { layers: grads }, cur))
    }

    /// Named mutable views of every trainable parameter block, in model
    /// order; matches [`ModelGrads::blocks`].
    pub fn param_blocks_mut(&mut self) -> Vec<(String, &mut [F])> {
        let mut out = Vec::new();
        for (idx, layer) in self.layers.iter_mut().enumerate() {
            match layer {
                Layer::Mjkan(l) => {
                    let (gamma, beta, base_w, base_b) = l.split_params_mut();
                    out.push((format!("layer{idx}.gamma"), gamma.data_mut()));
                    out.push((format!("layer{idx}.beta"), beta.data_mut()));
                    if let Some(w) = base_w {
                        out.push((format!("layer{idx}.base_weight"), w.data_mut()));
                    }
                    if let Some(b) = base_b {
                        out.push((format!("layer{idx}.base_bias"), b.as_mut_slice()));
                    }
                }
                Layer::Dense(l) => {
                    let (w, b) = l.split_params_mut();
                    out.push((format!("layer{idx}.weight"), w.data_mut()));
                    out.push((format!("layer{idx}.bias"), b.as_mut_slice()));
                }
                Layer::Relu | Layer::Squash(_) => {}
            }
        }
        out
    }
}
