//! Model parameters and their gradient mirrors.

use rand::Rng;

use crate::matrix::{add_assign, scale, Matrix};
use crate::rng::Prng;

/// Weights of one LSTM layer. Gate rows are stacked in the order
/// `[input, forget, cell, output]`: rows `g*H..(g+1)*H` of `w_ih`/`w_hh` and
/// the matching bias slices belong to gate `g`. The checkpoint format depends
/// on this order.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub w_ih: Matrix,   // 4H x D
    pub w_hh: Matrix,   // 4H x H
    pub b_ih: Vec<f64>, // 4H
    pub b_hh: Vec<f64>, // 4H
}

impl LstmLayerParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmLayerParams {
            w_ih: Matrix::zeros(4 * hidden, input_dim),
            w_hh: Matrix::zeros(4 * hidden, hidden),
            b_ih: vec![0.0; 4 * hidden],
            b_hh: vec![0.0; 4 * hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.w_ih.cols()
    }
}

/// Every learnable tensor of the model: embedding, stacked LSTM layers and
/// the linear output head, plus the two architecture knobs the forward pass
/// needs (dropout rate and window length).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub embedding: Matrix, // V x E
    pub layers: Vec<LstmLayerParams>,
    pub w_out: Matrix,   // V x H
    pub b_out: Vec<f64>, // V
    pub dropout_p: f64,
    pub seq_len: usize,
}

impl ModelParams {
    pub fn zeros(
        vocab_size: usize,
        embed_dim: usize,
        hidden: usize,
        num_layers: usize,
        dropout_p: f64,
        seq_len: usize,
    ) -> Self {
        let layers = (0..num_layers)
            .map(|l| LstmLayerParams::zeros(if l == 0 { embed_dim } else { hidden }, hidden))
            .collect();
        ModelParams {
            embedding: Matrix::zeros(vocab_size, embed_dim),
            layers,
            w_out: Matrix::zeros(vocab_size, hidden),
            b_out: vec![0.0; vocab_size],
            dropout_p,
            seq_len,
        }
    }

    /// Seeded initialization: LSTM and head weights/biases uniform in
    /// `(-1/sqrt(H), 1/sqrt(H))`, embedding uniform in `(-1, 1)` (unit-scale,
    /// as reference embedding layers initialize).
    pub fn init(
        vocab_size: usize,
        embed_dim: usize,
        hidden: usize,
        num_layers: usize,
        dropout_p: f64,
        seq_len: usize,
        rng: &mut Prng,
    ) -> Self {
        let mut params = Self::zeros(
            vocab_size, embed_dim, hidden, num_layers, dropout_p, seq_len,
        );
        let bound = 1.0 / (hidden as f64).sqrt();
        for (name, tensor) in params.tensors_mut() {
            let b = if name == "embedding" { 1.0 } else { bound };
            for w in tensor {
                *w = rng.gen_range(-b..b);
            }
        }
        params
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w_out.cols()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// All tensors in checkpoint order, with stable names.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = vec![("embedding".to_string(), self.embedding.as_slice())];
        for (l, layer) in self.layers.iter().enumerate() {
            out.push((format!("lstm{l}.w_ih"), layer.w_ih.as_slice()));
            out.push((format!("lstm{l}.w_hh"), layer.w_hh.as_slice()));
            out.push((format!("lstm{l}.b_ih"), layer.b_ih.as_slice()));
            out.push((format!("lstm{l}.b_hh"), layer.b_hh.as_slice()));
        }
        out.push(("w_out".to_string(), self.w_out.as_slice()));
        out.push(("b_out".to_string(), self.b_out.as_slice()));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = vec![("embedding".to_string(), self.embedding.as_mut_slice())];
        for (l, layer) in self.layers.iter_mut().enumerate() {
            out.push((format!("lstm{l}.w_ih"), layer.w_ih.as_mut_slice()));
            out.push((format!("lstm{l}.w_hh"), layer.w_hh.as_mut_slice()));
            out.push((format!("lstm{l}.b_ih"), layer.b_ih.as_mut_slice()));
            out.push((format!("lstm{l}.b_hh"), layer.b_hh.as_mut_slice()));
        }
        out.push(("w_out".to_string(), self.w_out.as_mut_slice()));
        out.push(("b_out".to_string(), self.b_out.as_mut_slice()));
        out
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Gradient (or moment) storage mirroring [`ModelParams`] entry-for-entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embedding: Matrix,
    pub layers: Vec<LstmLayerParams>,
    pub w_out: Matrix,
    pub b_out: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Gradients {
            embedding: Matrix::zeros(params.embedding.rows(), params.embedding.cols()),
            layers: params
                .layers
                .iter()
                .map(|l| LstmLayerParams::zeros(l.input_dim(), l.hidden()))
                .collect(),
            w_out: Matrix::zeros(params.w_out.rows(), params.w_out.cols()),
            b_out: vec![0.0; params.b_out.len()],
        }
    }

    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = vec![("embedding".to_string(), self.embedding.as_slice())];
        for (l, layer) in self.layers.iter().enumerate() {
            out.push((format!("lstm{l}.w_ih"), layer.w_ih.as_slice()));
            out.push((format!("lstm{l}.w_hh"), layer.w_hh.as_slice()));
            out.push((format!("lstm{l}.b_ih"), layer.b_ih.as_slice()));
            out.push((format!("lstm{l}.b_hh"), layer.b_hh.as_slice()));
        }
        out.push(("w_out".to_string(), self.w_out.as_slice()));
        out.push(("b_out".to_string(), self.b_out.as_slice()));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = vec![("embedding".to_string(), self.embedding.as_mut_slice())];
        for (l, layer) in self.layers.iter_mut().enumerate() {
            out.push((format!("lstm{l}.w_ih"), layer.w_ih.as_mut_slice()));
            out.push((format!("lstm{l}.w_hh"), layer.w_hh.as_mut_slice()));
            out.push((format!("lstm{l}.b_ih"), layer.b_ih.as_mut_slice()));
            out.push((format!("lstm{l}.b_hh"), layer.b_hh.as_mut_slice()));
        }
        out.push(("w_out".to_string(), self.w_out.as_mut_slice()));
        out.push(("b_out".to_string(), self.b_out.as_mut_slice()));
        out
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for ((_, a), (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            add_assign(a, b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for (_, t) in self.tensors_mut() {
            scale(t, s);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(_, t)| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}
