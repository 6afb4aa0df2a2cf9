//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::nn::{Gradients, ModelParams};

/// First/second moment estimates plus the step counter and hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &ModelParams, alpha: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        AdamState {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
            t: 0,
            alpha,
            beta1,
            beta2,
            epsilon,
        }
    }
}

/// One Adam update, elementwise over every tensor:
/// `t += 1; m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2;`
/// `theta -= alpha * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)`.
///
/// Gradients are validated before any state is touched, so a non-finite entry
/// leaves params and state unchanged.
pub fn adam_step(params: &mut ModelParams, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    for (name, tensor) in grads.tensors() {
        if !tensor.iter().all(|g| g.is_finite()) {
            return Err(Error::Numeric(format!("gradient tensor {name}")));
        }
    }
    state.t += 1;
    let bc1 = 1.0 - state.beta1.powi(state.t as i32);
    let bc2 = 1.0 - state.beta2.powi(state.t as i32);
    let (alpha, b1, b2, eps) = (state.alpha, state.beta1, state.beta2, state.epsilon);

    let param_tensors = params.tensors_mut();
    let grad_tensors = grads.tensors();
    let m_tensors = state.m.tensors_mut();
    let v_tensors = state.v.tensors_mut();
    for ((((_, p), (_, g)), (_, m)), (_, v)) in param_tensors
        .into_iter()
        .zip(grad_tensors)
        .zip(m_tensors)
        .zip(v_tensors)
    {
        for k in 0..p.len() {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            p[k] -= alpha * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
