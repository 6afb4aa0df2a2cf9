//! Forward pass: embedding lookup, LSTM cells, the stacked recurrence with
//! inverted dropout, the linear head and softmax.

use rand::Rng;

use crate::corpus::TokenId;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::params::{LstmLayerParams, ModelParams};
use crate::rng::Prng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Everything the backward pass needs from a train-mode window forward:
/// per-layer inputs, activated gates, cell/hidden states, dropout masks, the
/// (post-dropout) top hidden sequence and the head logits.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub ids: Vec<TokenId>,
    /// `layer_inputs[0]` is the embedded window (T x E); `layer_inputs[l]` for
    /// `l >= 1` is the post-dropout output of layer `l-1` (T x H).
    pub layer_inputs: Vec<Matrix>,
    /// Activated gate values per layer, T x 4H in `[i, f, g, o]` block order.
    pub gates: Vec<Matrix>,
    /// Cell states per layer, T x H.
    pub cells: Vec<Matrix>,
    /// Hidden states per layer before dropout, T x H.
    pub hiddens: Vec<Matrix>,
    /// Scaled dropout masks per layer (entries 0 or 1/(1-p)), T x H.
    pub masks: Vec<Matrix>,
    /// Post-dropout output of the top layer, T x H.
    pub h_top: Matrix,
    /// Head logits at the final timestep.
    pub logits: Vec<f64>,
}

/// Look up embedding rows for a window of ids: row `t` of the result equals
/// row `ids[t]` of the embedding (the dense form of `E . onehot(ids[t])`).
pub fn embedding_forward(ids: &[TokenId], embedding: &Matrix) -> Result<Matrix> {
    let mut out = Matrix::zeros(ids.len(), embedding.cols());
    for (t, &id) in ids.iter().enumerate() {
        if id >= embedding.rows() {
            return Err(Error::OutOfRange {
                what: "embedding lookup",
                id,
                bound: embedding.rows(),
            });
        }
        out.row_mut(t).copy_from_slice(embedding.row(id));
    }
    Ok(out)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM cell step:
/// `i = sig(W_i x + b_i + U_i h + v_i)`, `f`/`o` likewise, `g` with tanh,
/// `c = f*c_prev + i*g`, `h = o*tanh(c)`.
///
/// Returns `(h, c, gates)` where `gates` holds the activated `[i, f, g, o]`
/// blocks, each of length H.
pub fn lstm_cell_forward(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    p: &LstmLayerParams,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let hidden = p.hidden();
    let mut gates = vec![0.0; 4 * hidden];
    for (g, (bi, bh)) in gates.iter_mut().zip(p.b_ih.iter().zip(&p.b_hh)) {
        *g = bi + bh;
    }
    p.w_ih.matvec_acc(x, &mut gates);
    p.w_hh.matvec_acc(h_prev, &mut gates);

    let (ifo, rest) = gates.split_at_mut(2 * hidden);
    let (g_block, o_block) = rest.split_at_mut(hidden);
    for v in ifo.iter_mut() {
        *v = sigmoid(*v);
    }
    for v in g_block.iter_mut() {
        *v = v.tanh();
    }
    for v in o_block.iter_mut() {
        *v = sigmoid(*v);
    }

    let mut c = vec![0.0; hidden];
    let mut h = vec![0.0; hidden];
    for j in 0..hidden {
        let (i, f, g, o) = (
            gates[j],
            gates[hidden + j],
            gates[2 * hidden + j],
            gates[3 * hidden + j],
        );
        c[j] = f * c_prev[j] + i * g;
        h[j] = o * c[j].tanh();
    }
    if !h.iter().chain(&c).all(|v| v.is_finite()) {
        return Err(Error::Numeric("lstm cell output".to_string()));
    }
    Ok((h, c, gates))
}

/// Inverted dropout: in train mode each entry is zeroed with probability `p`
/// and survivors are scaled by `1/(1-p)`; eval mode passes `x` through with an
/// all-ones mask. Returns `(output, mask)` with the scale folded into the mask.
pub fn dropout(x: &Matrix, p: f64, mode: Mode, rng: &mut Prng) -> (Matrix, Matrix) {
    assert!(
        (0.0..1.0).contains(&p),
        "dropout probability must be in [0, 1)"
    );
    let mut mask = Matrix::zeros(x.rows(), x.cols());
    if mode == Mode::Eval || p == 0.0 {
        mask.fill(1.0);
        return (x.clone(), mask);
    }
    let keep_scale = 1.0 / (1.0 - p);
    let mut out = x.clone();
    for (m, v) in mask.as_mut_slice().iter_mut().zip(out.as_mut_slice()) {
        *m = if rng.gen::<f64>() < p {
            0.0
        } else {
            keep_scale
        };
        *v *= *m;
    }
    (out, mask)
}

/// Run the stacked LSTM over an embedded window (T x E). Layer `l` consumes
/// the (dropout-masked, in train mode) hidden sequence of layer `l-1`; all
/// initial states are zero. As in the stacked-LSTM implementations this model
/// follows, dropout sits between layers and not on the top layer's output.
/// Returns the top hidden sequence and, in train mode, the BPTT cache (its
/// `ids`/`logits` fields are filled by [`forward_window`]).
pub fn lstm_stack_forward(
    inputs: &Matrix,
    params: &ModelParams,
    mode: Mode,
    rng: &mut Prng,
) -> Result<(Matrix, Option<ForwardCache>)> {
    let t_len = inputs.rows();
    assert!(t_len >= 1, "empty input sequence");
    let hidden = params.hidden();
    let want_cache = mode == Mode::Train;

    let mut layer_inputs = Vec::new();
    let mut all_gates = Vec::new();
    let mut all_cells = Vec::new();
    let mut all_hiddens = Vec::new();
    let mut all_masks = Vec::new();

    let mut current = inputs.clone();
    for (l, layer) in params.layers.iter().enumerate() {
        let mut gates_seq = Matrix::zeros(t_len, 4 * hidden);
        let mut cells_seq = Matrix::zeros(t_len, hidden);
        let mut hiddens_seq = Matrix::zeros(t_len, hidden);
        let mut h = vec![0.0; hidden];
        let mut c = vec![0.0; hidden];
        for t in 0..t_len {
            let (h_new, c_new, gates) = lstm_cell_forward(current.row(t), &h, &c, layer)
                .map_err(|_| Error::Numeric(format!("lstm layer {l}, timestep {t}")))?;
            gates_seq.row_mut(t).copy_from_slice(&gates);
            cells_seq.row_mut(t).copy_from_slice(&c_new);
            hiddens_seq.row_mut(t).copy_from_slice(&h_new);
            h = h_new;
            c = c_new;
        }
        let last_layer = l + 1 == params.layers.len();
        let (dropped, mask) = if last_layer {
            let mut ones = Matrix::zeros(t_len, hidden);
            ones.fill(1.0);
            (hiddens_seq.clone(), ones)
        } else {
            dropout(&hiddens_seq, params.dropout_p, mode, rng)
        };
        if want_cache {
            layer_inputs.push(current);
            all_gates.push(gates_seq);
            all_cells.push(cells_seq);
            all_hiddens.push(hiddens_seq);
            all_masks.push(mask);
        }
        current = dropped;
    }

    let cache = want_cache.then(|| ForwardCache {
        ids: Vec::new(),
        layer_inputs,
        gates: all_gates,
        cells: all_cells,
        hiddens: all_hiddens,
        masks: all_masks,
        h_top: current.clone(),
        logits: Vec::new(),
    });
    Ok((current, cache))
}

/// `logits = W_out . h + b_out`.
pub fn output_head(h: &[f64], w_out: &Matrix, b_out: &[f64]) -> Vec<f64> {
    let mut logits = b_out.to_vec();
    w_out.matvec_acc(h, &mut logits);
    logits
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// `ln(sum(exp(x)))` with max subtraction.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Full forward over one window: embed, run the stack, apply the head to the
/// final timestep. In train mode the returned cache is ready for
/// [`crate::nn::backprop_window`].
pub fn forward_window(
    params: &ModelParams,
    ids: &[TokenId],
    mode: Mode,
    rng: &mut Prng,
) -> Result<(Vec<f64>, Option<ForwardCache>)> {
    let embedded = embedding_forward(ids, &params.embedding)?;
    let (h_top, mut cache) = lstm_stack_forward(&embedded, params, mode, rng)?;
    let logits = output_head(h_top.row(h_top.rows() - 1), &params.w_out, &params.b_out);
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric("output head logits".to_string()));
    }
    if let Some(c) = cache.as_mut() {
        c.ids = ids.to_vec();
        c.logits = logits.clone();
    }
    Ok((logits, cache))
}
