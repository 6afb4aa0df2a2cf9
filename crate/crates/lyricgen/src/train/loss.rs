//! Per-example cross-entropy, computed in log space.

use crate::corpus::TokenId;
use crate::error::{Error, Result};
use crate::nn::log_sum_exp;

/// `-log softmax(logits)[target]`, evaluated as
/// `log_sum_exp(logits) - logits[target]`. Unreduced: one value per example.
pub fn cross_entropy(logits: &[f64], target: TokenId) -> Result<f64> {
    if target >= logits.len() {
        return Err(Error::OutOfRange {
            what: "cross-entropy target",
            id: target,
            bound: logits.len(),
        });
    }
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric("cross-entropy logits".to_string()));
    }
    Ok(log_sum_exp(logits) - logits[target])
}
