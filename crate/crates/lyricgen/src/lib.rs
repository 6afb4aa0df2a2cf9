//! Genre-conditioned lyric generation.
//!
//! The pipeline ingests a song CSV, filters it by language and genre, splits
//! lyrics into `<V>`-delimited verses, tokenizes and builds a vocabulary,
//! trains a word-level model (embedding, three stacked LSTM layers with
//! dropout, linear head) on 4-token sliding windows with cross-entropy and
//! Adam, samples ~100-token continuations from a seed phrase, and scores
//! prediction/reference pairs with BLEU, ROUGE-1 recall and Jaccard
//! similarity.
//!
//! The forward and backward passes are written out analytically; gradients
//! are verified against central differences (see [`nn::grad_check`]).

pub mod corpus;
pub mod error;
pub mod generate;
pub mod matrix;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
