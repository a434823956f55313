//! Central finite-difference check of [`Network::backward`].
//!
//! Each trainable parameter is nudged by ±h and the loss is re-evaluated
//! through the forward pass only. Components whose perturbation flips the sign
//! of any ReLU pre-activation straddle a kink, where the numerical derivative
//! is meaningless; those are counted and skipped.

use super::loss::softmax_cross_entropy;
use super::{Network, Tensor2};
use crate::error::Result;

/// Denominator floor for the relative error, so components whose true
/// gradient is zero compare on absolute error instead.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub skipped_kinks: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
}

impl GradCheckReport {
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.checked > 0 && self.max_rel_error < rel_tol
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

pub fn check_gradients(
    net: &Network,
    batch: &Tensor2,
    labels: &[usize],
    step: f64,
) -> Result<GradCheckReport> {
    let (_, grads) = net.backward(batch, labels)?;
    let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
    let base_pattern = net.forward_cached(batch)?.relu_pattern(net.layers());

    let mut probe = net.clone();
    let mut report = GradCheckReport {
        checked: 0,
        skipped_kinks: 0,
        max_abs_error: 0.0,
        max_rel_error: 0.0,
    };

    for (t, tensor_grad) in analytic.iter().enumerate() {
        for (i, &g) in tensor_grad.iter().enumerate() {
            let original = probe.params_mut()[t][i];

            probe.params_mut()[t][i] = original + step;
            let (plus, plus_pattern) = eval(&probe, batch, labels)?;
            probe.params_mut()[t][i] = original - step;
            let (minus, minus_pattern) = eval(&probe, batch, labels)?;
            probe.params_mut()[t][i] = original;

            if plus_pattern != base_pattern || minus_pattern != base_pattern {
                report.skipped_kinks += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * step);
            report.checked += 1;
            report.max_abs_error = report.max_abs_error.max((g - numeric).abs());
            report.max_rel_error = report.max_rel_error.max(relative_error(g, numeric));
        }
    }
    Ok(report)
}

fn eval(net: &Network, batch: &Tensor2, labels: &[usize]) -> Result<(f64, Vec<bool>)> {
    let cache = net.forward_cached(batch)?;
    let loss = softmax_cross_entropy(&cache.logits, labels)?.loss;
    Ok((loss, cache.relu_pattern(net.layers())))
}
