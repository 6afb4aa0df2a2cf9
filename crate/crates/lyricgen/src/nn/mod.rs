//! The differentiable model: embedding, stacked LSTM with dropout, linear
//! head, and exact backpropagation through time.

mod backward;
mod forward;
mod grad_check;
mod params;

pub use backward::{backprop_window, backprop_window_into};
pub use forward::{
    dropout, embedding_forward, forward_window, log_sum_exp, lstm_cell_forward, lstm_stack_forward,
    output_head, softmax, ForwardCache, Mode,
};
pub use grad_check::grad_check;
pub use params::{Gradients, LstmLayerParams, ModelParams};
