//! AdamW with decoupled weight decay.

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Optimizer hyperparameters. Defaults: lr 1e-3, betas (0.9, 0.999),
/// eps 1e-8, weight decay 0.01.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWConfig<F> {
    pub lr: F,
    pub beta1: F,
    pub beta2: F,
    pub eps: F,
    pub weight_decay: F,
}

impl<F: Scalar> Default for AdamWConfig<F> {
    fn default() -> Self {
        AdamWConfig {
            lr: F::c(1e-3),
            beta1: F::c(0.9),
            beta2: F::c(0.999),
            eps: F::c(1e-8),
            weight_decay: F::c(0.01),
        }
    }
}

/// Per-parameter first/second moment buffers plus the step counter.
///
/// Moment buffers are allocated lazily on the first step, one pair per
/// parameter block, and keyed to the block order.
#[derive(Debug, Clone)]
pub struct AdamW<F> {
    cfg: AdamWConfig<F>,
    t: u64,
    moments: Vec<MomentPair<F>>,
}

#[derive(Debug, Clone)]
struct MomentPair<F> {
    m: Vec<F>,
    v: Vec<F>,
}

impl<F: Scalar> AdamW<F> {
    pub fn new(cfg: AdamWConfig<F>) -> Self {
        AdamW {
            cfg,
            t: 0,
            moments: Vec::new(),
        }
    }

    #[inline]
    pub fn config(&self) -> &AdamWConfig<F> {
        &self.cfg
    }

    #[inline]
    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update: `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`,
    /// bias-corrected, then `p <- p - lr (m_hat / (sqrt(v_hat) + eps) + wd p)`.
    ///
    /// `params` and `grads` must list the same blocks in the same order.
    pub fn step(
        &mut self,
        params: &mut [(String, &mut [F])],
        grads: &[(String, &[F])],
    ) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::shape("AdamW::step block count", params.len(), grads.len()));
        }
        if self.moments.is_empty() {
            self.moments = grads
                .iter()
                .map(|(_, g)| MomentPair {
                    m: vec![F::zero(); g.len()],
                    v: vec![F::zero(); g.len()],
                })
                .collect();
        }
        if self.moments.len() != params.len() {
            return Err(Error::shape(
                "AdamW::step state blocks",
                self.moments.len(),
                params.len(),
            ));
        }
        // validate everything before mutating anything
        for ((name, p), (gname, g)) in params.iter().zip(grads) {
            if name != gname {
                return Err(Error::InvalidArgument(format!(
                    "AdamW::step: parameter block `{name}` paired with gradient block `{gname}`"
                )));
            }
            if p.len() != g.len() {
                return Err(Error::shape(format!("AdamW::step block `{name}`"), p.len(), g.len()));
            }
            if !g.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteGradient { block: name.clone() });
            }
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = F::one() - self.cfg.beta1.powi(t);
        let c2 = F::one() - self.cfg.beta2.powi(t);
        let (b1, b2) = (self.cfg.beta1, self.cfg.beta2);
        let (lr, eps, wd) = (self.cfg.lr, self.cfg.eps, self.cfg.weight_decay);
        for (state, ((_, p), (_, g))) in self.moments.iter_mut().zip(params.iter_mut().zip(grads)) {
            for i in 0..p.len() {
                let gi = g[i];
                state.m[i] = b1 * state.m[i] + (F::one() - b1) * gi;
                state.v[i] = b2 * state.v[i] + (F::one() - b2) * gi * gi;
                let m_hat = state.m[i] / c1;
                let v_hat = state.v[i] / c2;
                p[i] = p[i] - lr * (m_hat / (v_hat.sqrt() + eps) + wd * p[i]);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lr: f64, wd: f64) -> AdamWConfig<f64> {
        AdamWConfig {
            lr,
            weight_decay: wd,
            ..AdamWConfig::default()
        }
    }

    fn one_block(p: f64) -> Vec<(String, Vec<f64>)> {
        vec![("p".to_string(), vec![p])]
    }

    fn step_scalar(opt: &mut AdamW<f64>, p: &mut f64, g: f64) {
        let mut params = one_block(*p);
        let mut views: Vec<(String, &mut [f64])> = params
            .iter_mut()
            .map(|(n, v)| (n.clone(), v.as_mut_slice()))
            .collect();
        let gvec = vec![g];
        let grads: Vec<(String, &[f64])> = vec![("p".to_string(), gvec.as_slice())];
        opt.step(&mut views, &grads).unwrap();
        *p = params[0].1[0];
    }

    #[test]
    fn zero_grad_zero_decay_leaves_params() {
        let mut opt = AdamW::new(cfg(0.1, 0.0));
        let mut p = 1.25;
        step_scalar(&mut opt, &mut p, 0.0);
        assert_eq!(p, 1.25);
    }

    #[test]
    fn first_step_analytic() {
        // g=1, lr=0.1, wd=0: bias corrections cancel, update = -0.1/(1+eps)
        let mut opt = AdamW::new(cfg(0.1, 0.0));
        let mut p = 0.0;
        step_scalar(&mut opt, &mut p, 1.0);
        let expected = -0.1 * (1.0 / (1.0 + 1e-8));
        assert!((p - expected).abs() < 1e-15);
        assert!((p + 0.1).abs() < 1e-8);
    }

    #[test]
    fn pure_decoupled_decay() {
        // wd=0.01, g=0, p=1, lr=0.1 -> p = 1 - 0.001 = 0.999
        let mut opt = AdamW::new(cfg(0.1, 0.01));
        let mut p = 1.0;
        step_scalar(&mut opt, &mut p, 0.0);
        assert!((p - 0.999).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_names_block() {
        let mut opt = AdamW::new(cfg(0.1, 0.0));
        let mut storage = vec![("layer3.gamma".to_string(), vec![1.0])];
        let mut views: Vec<(String, &mut [f64])> = storage
            .iter_mut()
            .map(|(n, v)| (n.clone(), v.as_mut_slice()))
            .collect();
        let gvec = vec![f64::NAN];
        let grads: Vec<(String, &[f64])> = vec![("layer3.gamma".to_string(), gvec.as_slice())];
        let err = opt.step(&mut views, &grads).unwrap_err();
        assert!(err.to_string().contains("layer3.gamma"), "{err}");
        // params untouched on failure
        assert_eq!(storage[0].1[0], 1.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut opt = AdamW::new(cfg(0.1, 0.0));
        let mut storage = vec![("p".to_string(), vec![1.0, 2.0])];
        let mut views: Vec<(String, &mut [f64])> = storage
            .iter_mut()
            .map(|(n, v)| (n.clone(), v.as_mut_slice()))
            .collect();
        let gvec = vec![0.5];
        let grads: Vec<(String, &[f64])> = vec![("p".to_string(), gvec.as_slice())];
        assert!(opt.step(&mut views, &grads).is_err());
    }

    #[test]
    fn zero_decay_equals_plain_adam_over_100_steps() {
        // Independent plain-Adam oracle, written out longhand.
        let (lr, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-8);
        let mut opt = AdamW::new(AdamWConfig {
            lr,
            beta1: b1,
            beta2: b2,
            eps,
            weight_decay: 0.0,
        });
        let n = 7;
        let targets: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 19) as f64 * 0.3 - 2.0).collect();
        let mut p_ours: Vec<f64> = (0..n).map(|i| (i as f64) * 0.5 - 1.5).collect();
        let mut p_adam = p_ours.clone();
        let mut m = vec![0.0; n];
        let mut v = vec![0.0; n];
        for t in 1..=100 {
            // quadratic loss 0.5*sum (p - target)^2 -> grad = p - target
            let g: Vec<f64> = p_ours.iter().zip(&targets).map(|(p, t)| p - t).collect();
            let mut storage = vec![("p".to_string(), p_ours.clone())];
            let mut views: Vec<(String, &mut [f64])> = storage
                .iter_mut()
                .map(|(n, v)| (n.clone(), v.as_mut_slice()))
                .collect();
            let grads: Vec<(String, &[f64])> = vec![("p".to_string(), g.as_slice())];
            opt.step(&mut views, &grads).unwrap();
            p_ours = storage.remove(0).1;

            let g_adam: Vec<f64> = p_adam.iter().zip(&targets).map(|(p, t)| p - t).collect();
            for i in 0..n {
                m[i] = b1 * m[i] + (1.0 - b1) * g_adam[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g_adam[i] * g_adam[i];
                let m_hat = m[i] / (1.0 - b1.powi(t));
                let v_hat = v[i] / (1.0 - b2.powi(t));
                p_adam[i] -= lr * (m_hat / (v_hat.sqrt() + eps));
            }
            for i in 0..n {
                assert_eq!(p_ours[i], p_adam[i], "divergence at step {t}, index {i}");
            }
        }
    }
}
