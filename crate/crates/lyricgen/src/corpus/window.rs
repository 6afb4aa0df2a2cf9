//! Sliding-window training examples.

use super::vocab::TokenId;

/// A fixed-length context and the token that follows it in the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowExample {
    pub context: Vec<TokenId>,
    pub target: TokenId,
}

/// All windows of one song: example `k` pairs `ids[k..k+seq_len]` with target
/// `ids[k+seq_len]`, yielding `max(0, len - seq_len)` examples.
pub fn make_windows(ids: &[TokenId], seq_len: usize) -> Vec<WindowExample> {
    assert!(seq_len >= 1, "seq_len must be at least 1");
    if ids.len() <= seq_len {
        return Vec::new();
    }
    (0..ids.len() - seq_len)
        .map(|k| WindowExample {
            context: ids[k..k + seq_len].to_vec(),
            target: ids[k + seq_len],
        })
        .collect()
}

/// Windows of every song concatenated. Windows never span across songs, but
/// do cross `<V>` tokens within a song.
pub fn corpus_windows(songs: &[Vec<TokenId>], seq_len: usize) -> Vec<WindowExample> {
    songs
        .iter()
        .flat_map(|ids| make_windows(ids, seq_len))
        .collect()
}
