//! Song CSV ingestion and filtering.

use std::path::Path;

use crate::error::{Error, Result};

/// One row of the input dataset. `playlist_genre` and `language` are stored
/// trimmed and lowercased; all unrecognized columns are kept in `extra` in
/// header order.
#[derive(Debug, Clone, PartialEq)]
pub struct SongRecord {
    pub lyrics: String,
    pub playlist_genre: String,
    pub language: String,
    pub title: Option<String>,
    pub artist: Option<String>,
    pub extra: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SongTable {
    pub songs: Vec<SongRecord>,
}

impl SongTable {
    pub fn len(&self) -> usize {
        self.songs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.songs.is_empty()
    }
}

const REQUIRED: [&str; 3] = ["lyrics", "playlist_genre", "language"];
const TITLE_COLUMNS: [&str; 2] = ["title", "track_name"];
const ARTIST_COLUMNS: [&str; 2] = ["artist", "track_artist"];

/// Load an RFC-4180 song CSV. The header must contain `lyrics`,
/// `playlist_genre` and `language`; `title`/`track_name` and
/// `artist`/`track_artist` are picked up when present. Row order is preserved.
pub fn load_song_table(path: impl AsRef<Path>) -> Result<SongTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_open_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut required = [0usize; 3];
    for (slot, name) in required.iter_mut().zip(REQUIRED) {
        *slot = col(name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let [lyrics_col, genre_col, language_col] = required;
    let title_col = TITLE_COLUMNS.iter().find_map(|n| col(n));
    let artist_col = ARTIST_COLUMNS.iter().find_map(|n| col(n));

    let mut songs = Vec::new();
    for (i, row) in reader.records().enumerate() {
        // header is line 1, first data row is line 2
        let row_number = i + 2;
        let record = row.map_err(|e| Error::MalformedRow {
            row: row_number,
            msg: e.to_string(),
        })?;
        let field = |idx: usize| record.get(idx).unwrap_or("").to_string();
        let special = |idx: usize| {
            idx == lyrics_col
                || idx == genre_col
                || idx == language_col
                || Some(idx) == title_col
                || Some(idx) == artist_col
        };
        let extra = headers
            .iter()
            .enumerate()
            .filter(|(idx, _)| !special(*idx))
            .map(|(idx, name)| (name.clone(), field(idx)))
            .collect();
        songs.push(SongRecord {
            lyrics: field(lyrics_col),
            playlist_genre: field(genre_col).trim().to_lowercase(),
            language: field(language_col).trim().to_lowercase(),
            title: title_col.map(field).filter(|t| !t.is_empty()),
            artist: artist_col.map(field).filter(|a| !a.is_empty()),
            extra,
        });
    }
    Ok(SongTable { songs })
}

fn csv_open_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::MalformedRow {
            row: 1,
            msg: format!("{other:?}"),
        },
    }
}

/// Keep songs whose language matches (case-insensitive) and, when `genre` is
/// given, whose playlist genre matches too. Songs with empty lyrics are
/// dropped; row order is preserved.
pub fn filter_songs(table: &SongTable, language: &str, genre: Option<&str>) -> SongTable {
    let language = language.trim().to_lowercase();
    let genre = genre.map(|g| g.trim().to_lowercase());
    let songs = table
        .songs
        .iter()
        .filter(|s| s.language == language)
        .filter(|s| genre.as_deref().is_none_or(|g| s.playlist_genre == g))
        .filter(|s| !s.lyrics.trim().is_empty())
        .cloned()
        .collect();
    SongTable { songs }
}
