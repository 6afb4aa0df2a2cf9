//! Finite-difference verification of the analytic gradients.

use crate::corpus::WindowExample;
use crate::error::{Error, Result};
use crate::nn::backward::backprop_window;
use crate::nn::forward::{forward_window, log_sum_exp, Mode};
use crate::nn::params::ModelParams;
use crate::rng::seeded;

/// Compare every analytic parameter gradient against a central difference
/// `(L(p+eps) - L(p-eps)) / 2eps` and return the maximum relative error
/// `|analytic - numeric| / max(1, |analytic|)`.
///
/// Dropout must be disabled: the perturbed losses are computed without masks,
/// so any masking would make the two sides incomparable. Intended for tiny
/// models; cost is two forwards per scalar parameter.
pub fn grad_check(params: &ModelParams, example: &WindowExample, epsilon: f64) -> Result<f64> {
    if params.dropout_p != 0.0 {
        return Err(Error::Config(
            "grad_check requires dropout_p = 0".to_string(),
        ));
    }
    let (_, cache) = forward_window(params, &example.context, Mode::Train, &mut seeded(0))?;
    let cache = cache.expect("train mode produces a cache");
    let (_, analytic) = backprop_window(example, params, &cache)?;

    let mut probe = params.clone();
    let mut max_rel: f64 = 0.0;
    for ti in 0..analytic.tensors().len() {
        for si in 0..analytic.tensors()[ti].1.len() {
            let original = probe.tensors_mut()[ti].1[si];
            probe.tensors_mut()[ti].1[si] = original + epsilon;
            let plus = window_loss(&probe, example)?;
            probe.tensors_mut()[ti].1[si] = original - epsilon;
            let minus = window_loss(&probe, example)?;
            probe.tensors_mut()[ti].1[si] = original;

            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = analytic.tensors()[ti].1[si];
            let rel = (a - numeric).abs() / a.abs().max(1.0);
            max_rel = max_rel.max(rel);
        }
    }
    Ok(max_rel)
}

fn window_loss(params: &ModelParams, example: &WindowExample) -> Result<f64> {
    let (logits, _) = forward_window(params, &example.context, Mode::Eval, &mut seeded(0))?;
    Ok(log_sum_exp(&logits) - logits[example.target])
}
