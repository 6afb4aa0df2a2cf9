//! Binary checkpoint format.
//!
//! Layout:
//! ```text
//! magic   b"LYRC"
//! version u32 little-endian (currently 1)
//! meta    u64 LE byte length, then a JSON block (dims, hyperparameters,
//!         gate order, vocab in id order, Adam step)
//! tensors raw f64 LE values: embedding, per layer w_ih/w_hh/b_ih/b_hh,
//!         w_out, b_out; then the Adam m moments in the same order, then v
//! check   u64 LE FNV-1a hash of every preceding byte
//! ```
//! A round trip restores every scalar bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::nn::ModelParams;
use crate::train::adam::AdamState;

const MAGIC: &[u8; 4] = b"LYRC";
const VERSION: u32 = 1;
const GATE_ORDER: &str = "ifgo";

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointMeta {
    vocab_size: usize,
    embed_dim: usize,
    hidden: usize,
    layers: usize,
    seq_len: usize,
    dropout_p: f64,
    gate_order: String,
    alpha: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: u64,
    vocab: Vec<String>,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn save_checkpoint(
    params: &ModelParams,
    vocab: &Vocab,
    state: &AdamState,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let meta = CheckpointMeta {
        vocab_size: params.vocab_size(),
        embed_dim: params.embed_dim(),
        hidden: params.hidden(),
        layers: params.num_layers(),
        seq_len: params.seq_len,
        dropout_p: params.dropout_p,
        gate_order: GATE_ORDER.to_string(),
        alpha: state.alpha,
        beta1: state.beta1,
        beta2: state.beta2,
        epsilon: state.epsilon,
        step: state.t,
        vocab: vocab.tokens().to_vec(),
    };
    let meta_bytes = serde_json::to_vec(&meta).expect("metadata serializes");

    let scalar_count = 3 * params.scalar_count();
    let mut buf = Vec::with_capacity(24 + meta_bytes.len() + 8 * scalar_count);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(meta_bytes.len() as u64).to_le_bytes());
    buf.extend_from_slice(&meta_bytes);
    for (_, tensor) in params.tensors() {
        for value in tensor {
            buf.extend_from_slice(&value.to_le_bytes());
        }
    }
    for moments in [&state.m, &state.v] {
        for (_, tensor) in moments.tensors() {
            for value in tensor {
                buf.extend_from_slice(&value.to_le_bytes());
            }
        }
    }
    buf.extend_from_slice(&fnv1a64(&buf).to_le_bytes());
    fs::write(path, buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelParams, Vocab, AdamState)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;

    if bytes.len() < 4 || &bytes[0..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 8 {
        return Err(Error::ChecksumMismatch);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: VERSION,
        });
    }
    if bytes.len() < 24 {
        return Err(Error::ChecksumMismatch);
    }
    let body = &bytes[..bytes.len() - 8];
    let stored = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
    if fnv1a64(body) != stored {
        return Err(Error::ChecksumMismatch);
    }

    let corrupt = |msg: &str| Error::CorruptCheckpoint(msg.to_string());
    let meta_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let meta_end = 16usize
        .checked_add(meta_len)
        .filter(|&end| end <= body.len())
        .ok_or_else(|| corrupt("metadata length out of bounds"))?;
    let meta: CheckpointMeta =
        serde_json::from_slice(&body[16..meta_end]).map_err(|e| corrupt(&e.to_string()))?;
    if meta.gate_order != GATE_ORDER {
        return Err(corrupt(&format!(
            "unsupported gate order {}",
            meta.gate_order
        )));
    }
    if meta.vocab.len() != meta.vocab_size {
        return Err(corrupt("vocab list does not match vocab_size"));
    }
    let vocab =
        Vocab::from_id_order(meta.vocab.clone()).map_err(|e| corrupt(&format!("vocab: {e}")))?;

    let mut params = ModelParams::zeros(
        meta.vocab_size,
        meta.embed_dim,
        meta.hidden,
        meta.layers,
        meta.dropout_p,
        meta.seq_len,
    );
    let mut state = AdamState::new(&params, meta.alpha, meta.beta1, meta.beta2, meta.epsilon);
    state.t = meta.step;

    let expected = 3 * params.scalar_count() * 8;
    let tensor_bytes = &body[meta_end..];
    if tensor_bytes.len() != expected {
        return Err(corrupt(&format!(
            "expected {expected} tensor bytes, found {}",
            tensor_bytes.len()
        )));
    }
    let mut values = tensor_bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut fill = |tensors: Vec<(String, &mut [f64])>| {
        for (_, tensor) in tensors {
            for slot in tensor {
                *slot = values.next().expect("length checked above");
            }
        }
    };
    fill(params.tensors_mut());
    fill(state.m.tensors_mut());
    fill(state.v.tensors_mut());

    Ok((params, vocab, state))
}
