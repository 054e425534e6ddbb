//! Central finite-difference gradient verification.
//!
//! This is an independent oracle: it only ever calls the forward pass, so a
//! bug in `Tape::backward` cannot leak into the check. Tests across the
//! workspace compare analytic gradients against `finite_diff_grads` at the
//! tolerances in `tolerance`.

use crate::nn::params::{ParamId, ParamSet};
use crate::nn::tensor::Tensor;
use crate::Result;

pub mod tolerance {
    /// Perturbation step for central differences.
    pub const FD_STEP: f64 = 1e-5;
    /// Relative error allowed between analytic and finite-difference values.
    pub const FD_REL: f64 = 1e-4;
    /// Absolute floor below which differences are ignored; central
    /// differences lose all significant digits near zero.
    pub const FD_ABS: f64 = 1e-7;
}

/// Gradient of `loss` with respect to every entry of every parameter,
/// by central differences: (f(x+h) - f(x-h)) / 2h.
pub fn finite_diff_grads<F>(ps: &mut ParamSet, mut loss: F) -> Result<Vec<Tensor>>
where
    F: FnMut(&ParamSet) -> Result<f64>,
{
    let h = tolerance::FD_STEP;
    let mut out = Vec::new();
    for idx in 0..ps.len() {
        let id = ParamId(idx);
        let n = ps.get(id).len();
        let mut grad = Tensor::zeros(&ps.get(id).shape.clone());
        for j in 0..n {
            let orig = ps.get(id).data[j];
            ps.get_mut(id).data[j] = orig + h;
            let up = loss(ps)?;
            ps.get_mut(id).data[j] = orig - h;
            let down = loss(ps)?;
            ps.get_mut(id).data[j] = orig;
            grad.data[j] = (up - down) / (2.0 * h);
        }
        out.push(grad);
    }
    Ok(out)
}

/// Worst relative deviation between analytic and finite-difference gradients.
/// `analytic` entries of `None` are treated as all-zero.
pub fn max_relative_error(analytic: &[Option<Tensor>], fd: &[Tensor]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, f) in analytic.iter().zip(fd.iter()) {
        for j in 0..f.data.len() {
            let av = a.as_ref().map_or(0.0, |t| t.data[j]);
            let fv = f.data[j];
            let diff = (av - fv).abs();
            if diff <= tolerance::FD_ABS {
                continue;
            }
            let denom = av.abs().max(fv.abs()).max(1e-8);
            worst = worst.max(diff / denom);
        }
    }
    worst
}

/// Convenience assertion used by gradient tests.
pub fn check_grads(analytic: &[Option<Tensor>], fd: &[Tensor], what: &str) {
    let err = max_relative_error(analytic, fd);
    assert!(
        err <= tolerance::FD_REL,
        "{what}: max relative gradient error {err:.3e} exceeds {:.1e}",
        tolerance::FD_REL
    );
}
