//! Corpus preprocessing: CSV ingestion, language/genre filtering, verse
//! splitting, tokenization, vocabulary construction and sliding-window
//! example extraction.

mod table;
mod tokenize;
mod verse;
mod vocab;
mod window;

pub use table::{filter_songs, load_song_table, SongRecord, SongTable};
pub use tokenize::{tokenize, UNK_TOKEN};
pub use verse::{split_verses, VERSE_TOKEN};
pub use vocab::{TokenId, Vocab, UNK_ID, VERSE_ID};
pub use window::{corpus_windows, make_windows, WindowExample};

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Split each song into verses, tokenize, and build the vocabulary over all
/// songs. Tokenization runs per song in parallel; vocabulary ids still follow
/// song order, then position, so the result is deterministic.
pub fn preprocess(table: &SongTable) -> (Vec<Vec<String>>, Vocab) {
    let songs: Vec<Vec<String>> = table
        .songs
        .par_iter()
        .map(|song| tokenize(&split_verses(&song.lyrics)))
        .collect();
    let vocab = Vocab::build(&songs);
    (songs, vocab)
}

/// Write a preprocessed corpus: one song per line, tokens space-separated
/// (`<V>` included).
pub fn write_corpus(songs: &[Vec<String>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for song in songs {
        writeln!(out, "{}", song.join(" ")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Read a corpus file produced by [`write_corpus`].
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut songs = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err)?;
        songs.push(line.split_whitespace().map(String::from).collect());
    }
    Ok(songs)
}
