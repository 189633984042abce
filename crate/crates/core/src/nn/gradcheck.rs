//! Central finite-difference verification of analytic gradients.

use super::{Network, TrainingBatch};
use crate::error::Result;

/// Denominator floor for [`relative_error`].
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub worst_index: Option<usize>,
    pub checked: usize,
    /// Coordinates whose perturbation flipped a rectifier, where the loss is
    /// not differentiable at the scale of the perturbation.
    pub skipped_kinks: usize,
}

/// `|a - b| / max(|a|, |b|, 1e-8)`; two values that are both ~0 compare as 0.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR);
    (analytic - numeric).abs() / scale
}

/// Compares `analytic` against central differences `(J(p+h) - J(p-h)) / 2h`
/// at the given parameter coordinates (all of them when `coords` is `None`).
pub fn check_gradients(
    net: &Network,
    batch: &TrainingBatch,
    analytic: &[f64],
    perturbation: f64,
    coords: Option<&[usize]>,
) -> Result<GradientCheck> {
    assert!(perturbation > 0.0, "perturbation must be positive");
    let base_pattern = net.forward_cached(&batch.inputs, batch.len())?.activation_pattern();
    let mut probe = net.clone();
    let mut report = GradientCheck::default();
    let all: alloc::vec::Vec<usize>;
    let coords = match coords {
        Some(c) => c,
        None => {
            all = (0..net.params().len()).collect();
            &all
        }
    };
    for &i in coords {
        let original = probe.params()[i];
        probe.params_mut()[i] = original + perturbation;
        let plus_pattern = probe.forward_cached(&batch.inputs, batch.len())?.activation_pattern();
        let plus = probe.loss(batch)?;
        probe.params_mut()[i] = original - perturbation;
        let minus_pattern = probe.forward_cached(&batch.inputs, batch.len())?.activation_pattern();
        let minus = probe.loss(batch)?;
        probe.params_mut()[i] = original;
        if plus_pattern != base_pattern || minus_pattern != base_pattern {
            report.skipped_kinks += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * perturbation);
        let err = relative_error(analytic[i], numeric);
        report.checked += 1;
        if report.worst_index.is_none() || err > report.max_relative_error {
            report.max_relative_error = err;
            report.worst_index = Some(i);
        }
    }
    Ok(report)
}

/// Full-coordinate check of [`Network::loss_and_grad`].
pub fn gradient_check(net: &Network, batch: &TrainingBatch, perturbation: f64) -> Result<f64> {
    let (_, grads) = net.loss_and_grad(batch)?;
    Ok(check_gradients(net, batch, &grads, perturbation, None)?.max_relative_error)
}
