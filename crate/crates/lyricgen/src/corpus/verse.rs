//! Verse splitting. Lyric datasets ship verses glued together in one string;
//! the start of a verse is signalled by capitalization, so a `<V>` delimiter
//! is inserted before every capitalized word that plausibly opens a verse.

/// Delimiter inserted between verses. It becomes an ordinary vocabulary item.
pub const VERSE_TOKEN: &str = "<V>";

/// Insert ` <V> ` at every verse boundary. A boundary sits immediately before
/// a whitespace-delimited word whose first alphabetic character is uppercase,
/// except:
/// - the first word of the text,
/// - the pronoun "I" (also in forms like "I've", "I,"),
/// - a word opened by a quotation mark.
///
/// Output words are joined by single spaces; no leading or trailing `<V>` is
/// produced.
pub fn split_verses(lyrics: &str) -> String {
    let mut out = String::with_capacity(lyrics.len() + lyrics.len() / 8);
    for (i, word) in lyrics.split_whitespace().enumerate() {
        if i > 0 {
            if starts_verse(word) {
                out.push(' ');
                out.push_str(VERSE_TOKEN);
            }
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn starts_verse(word: &str) -> bool {
    let Some((idx, first)) = word.char_indices().find(|(_, c)| c.is_alphabetic()) else {
        return false;
    };
    if !first.is_uppercase() {
        return false;
    }
    // `"Hello` opens a quote inside a line, not a verse
    if word[..idx]
        .chars()
        .any(|c| matches!(c, '"' | '\u{201c}' | '\u{2018}'))
    {
        return false;
    }
    // the pronoun: first alphabetic run is exactly "I" ("I", "I've", "I,")
    let mut rest = word[idx..].chars();
    if rest.next() == Some('I') && !rest.next().is_some_and(|c| c.is_alphabetic()) {
        return false;
    }
    true
}
