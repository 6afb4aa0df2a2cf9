//! Exact backpropagation through time for one window.
//!
//! The loss is the cross-entropy of the final timestep's logits against the
//! window target; gradients flow through the head, the dropout masks recorded
//! in the cache, and the full LSTM recurrence of every layer.

use crate::corpus::WindowExample;
use crate::error::{Error, Result};
use crate::matrix::{add_assign, Matrix};
use crate::nn::forward::{log_sum_exp, ForwardCache};
use crate::nn::params::{Gradients, ModelParams};

/// Analytic gradients of the per-example cross-entropy with respect to every
/// parameter. The cache must come from a train-mode [`super::forward_window`]
/// on the same ids and parameters; its dropout masks are reused exactly.
pub fn backprop_window(
    example: &WindowExample,
    params: &ModelParams,
    cache: &ForwardCache,
) -> Result<(f64, Gradients)> {
    let mut grads = Gradients::zeros_like(params);
    let loss = backprop_window_into(example, params, cache, &mut grads)?;
    Ok((loss, grads))
}

/// Like [`backprop_window`] but accumulates into an existing gradient buffer,
/// so a batch can be summed without one allocation per example.
pub fn backprop_window_into(
    example: &WindowExample,
    params: &ModelParams,
    cache: &ForwardCache,
    grads: &mut Gradients,
) -> Result<f64> {
    check_consistency(example, params, cache)?;

    let t_len = example.context.len();
    let hidden = params.hidden();

    // dlogits = softmax(logits) - onehot(target); loss via log-sum-exp
    let lse = log_sum_exp(&cache.logits);
    let loss = lse - cache.logits[example.target];
    let mut dlogits: Vec<f64> = cache.logits.iter().map(|&z| (z - lse).exp()).collect();
    dlogits[example.target] -= 1.0;

    let h_last = cache.h_top.row(t_len - 1);
    grads.w_out.outer_acc(&dlogits, h_last);
    add_assign(&mut grads.b_out, &dlogits);

    // gradient w.r.t. the (post-dropout) output sequence of the top layer:
    // only the final timestep feeds the head
    let mut d_out = Matrix::zeros(t_len, hidden);
    params
        .w_out
        .matvec_t_acc(&dlogits, d_out.row_mut(t_len - 1));

    for l in (0..params.num_layers()).rev() {
        let layer = &params.layers[l];
        let gates = &cache.gates[l];
        let cells = &cache.cells[l];
        let hiddens = &cache.hiddens[l];
        let mask = &cache.masks[l];
        let x_seq = &cache.layer_inputs[l];

        let g_layer = &mut grads.layers[l];
        let mut d_input = Matrix::zeros(t_len, layer.input_dim());
        let mut dh_carry = vec![0.0; hidden];
        let mut dc_carry = vec![0.0; hidden];
        let mut dpre = vec![0.0; 4 * hidden];
        let zeros = vec![0.0; hidden];

        for t in (0..t_len).rev() {
            let gate_row = gates.row(t);
            let c_t = cells.row(t);
            let c_prev = if t > 0 { cells.row(t - 1) } else { &zeros[..] };
            let h_prev = if t > 0 {
                hiddens.row(t - 1)
            } else {
                &zeros[..]
            };
            let d_raw = d_out.row(t);
            let mask_row = mask.row(t);

            for j in 0..hidden {
                let i = gate_row[j];
                let f = gate_row[hidden + j];
                let g = gate_row[2 * hidden + j];
                let o = gate_row[3 * hidden + j];
                let tanh_c = c_t[j].tanh();

                let dh = d_raw[j] * mask_row[j] + dh_carry[j];
                let dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_carry[j];

                dpre[j] = dc * g * i * (1.0 - i);
                dpre[hidden + j] = dc * c_prev[j] * f * (1.0 - f);
                dpre[2 * hidden + j] = dc * i * (1.0 - g * g);
                dpre[3 * hidden + j] = dh * tanh_c * o * (1.0 - o);
                dc_carry[j] = dc * f;
            }

            g_layer.w_ih.outer_acc(&dpre, x_seq.row(t));
            g_layer.w_hh.outer_acc(&dpre, h_prev);
            add_assign(&mut g_layer.b_ih, &dpre);
            add_assign(&mut g_layer.b_hh, &dpre);

            dh_carry.fill(0.0);
            layer.w_hh.matvec_t_acc(&dpre, &mut dh_carry);
            layer.w_ih.matvec_t_acc(&dpre, d_input.row_mut(t));
        }
        d_out = d_input;
    }

    // d_out is now T x E: scatter-add into the embedding rows that were used
    for (t, &id) in example.context.iter().enumerate() {
        add_assign(grads.embedding.row_mut(id), d_out.row(t));
    }
    Ok(loss)
}

fn check_consistency(
    example: &WindowExample,
    params: &ModelParams,
    cache: &ForwardCache,
) -> Result<()> {
    if example.target >= params.vocab_size() {
        return Err(Error::OutOfRange {
            what: "window target",
            id: example.target,
            bound: params.vocab_size(),
        });
    }
    if cache.ids != example.context {
        return Err(Error::Mismatch(
            "forward cache was built for a different context".to_string(),
        ));
    }
    let t_len = example.context.len();
    let layers = params.num_layers();
    let consistent = cache.layer_inputs.len() == layers
        && cache.gates.len() == layers
        && cache.cells.len() == layers
        && cache.hiddens.len() == layers
        && cache.masks.len() == layers
        && cache.h_top.rows() == t_len
        && cache.h_top.cols() == params.hidden()
        && cache.logits.len() == params.vocab_size();
    if !consistent {
        return Err(Error::Mismatch(
            "forward cache does not match model dimensions".to_string(),
        ));
    }
    Ok(())
}
