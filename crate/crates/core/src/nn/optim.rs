//! Gradient application: global-norm clipping, plain SGD, and an
//! adaptive-moment variant behind the same interface.

use crate::nn::params::ParamSet;
use crate::nn::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimKind {
    pub fn adam() -> Self {
        OptimKind::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimKind,
    pub lr: f64,
    /// Global-norm clip threshold; `None` disables clipping.
    pub grad_clip: Option<f64>,
    step: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Optimizer {
    pub fn new(kind: OptimKind, lr: f64, grad_clip: Option<f64>, ps: &ParamSet) -> Self {
        let zeros: Vec<Tensor> = ps.iter().map(|(_, t)| Tensor::zeros(&t.shape)).collect();
        Self { kind, lr, grad_clip, step: 0, m: zeros.clone(), v: zeros }
    }

    /// Apply one update. `grads` is aligned with the `ParamSet`; `None`
    /// entries are parameters that did not participate and are left alone.
    pub fn apply(&mut self, ps: &mut ParamSet, grads: &[Option<Tensor>]) -> Result<()> {
        if grads.len() != ps.len() {
            return Err(Error::Dimension(format!(
                "optimizer got {} gradients for {} parameters",
                grads.len(),
                ps.len()
            )));
        }
        for g in grads.iter().flatten() {
            if g.has_nan() {
                return Err(Error::Numeric("NaN gradient".into()));
            }
        }

        // Global-norm clip over the full gradient, missing entries as zero.
        let mut scale = 1.0;
        if let Some(clip) = self.grad_clip {
            let total: f64 = grads.iter().flatten().map(|g| g.sq_norm()).sum();
            let norm = total.sqrt();
            if norm > clip {
                scale = clip / norm;
            }
        }

        self.step += 1;
        for (i, g) in grads.iter().enumerate() {
            let Some(g) = g else { continue };
            let p = ps.get_mut(crate::nn::params::ParamId(i));
            if g.data.len() != p.data.len() {
                return Err(Error::Dimension(format!(
                    "gradient shape {:?} vs parameter shape {:?}",
                    g.shape, p.shape
                )));
            }
            match self.kind {
                OptimKind::Sgd => {
                    for (pv, gv) in p.data.iter_mut().zip(g.data.iter()) {
                        *pv -= self.lr * scale * gv;
                    }
                }
                OptimKind::Adam { beta1, beta2, eps } => {
                    let t = self.step as f64;
                    let bc1 = 1.0 - beta1.powf(t);
                    let bc2 = 1.0 - beta2.powf(t);
                    let (m, v) = (&mut self.m[i], &mut self.v[i]);
                    for j in 0..p.data.len() {
                        let gv = scale * g.data[j];
                        m.data[j] = beta1 * m.data[j] + (1.0 - beta1) * gv;
                        v.data[j] = beta2 * v.data[j] + (1.0 - beta2) * gv * gv;
                        let mhat = m.data[j] / bc1;
                        let vhat = v.data[j] / bc2;
                        p.data[j] -= self.lr * mhat / (vhat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}
