//! Word-level tokenizer shared by training, generation and evaluation.

use super::verse::VERSE_TOKEN;

/// Stand-in for out-of-vocabulary words.
pub const UNK_TOKEN: &str = "<UNK>";

/// Punctuation detached into separate tokens. Apostrophes and hyphens are not
/// listed on purpose: "I've", "feelin'" and "so-long" stay single tokens.
const DETACHED: [char; 9] = [',', '.', '!', '?', ';', ':', '"', '(', ')'];

/// Split `text` on whitespace, detach the punctuation in [`DETACHED`] from
/// word edges, and lowercase everything except a literal `<V>`, which passes
/// through intact.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        if word == VERSE_TOKEN {
            tokens.push(word.to_string());
            continue;
        }
        split_word(word, &mut tokens);
    }
    tokens
}

fn split_word(word: &str, out: &mut Vec<String>) {
    let mut core = word;
    while let Some(c) = core.chars().next().filter(|c| DETACHED.contains(c)) {
        out.push(c.to_string());
        core = &core[c.len_utf8()..];
    }
    let mut trailing = Vec::new();
    while let Some(c) = core.chars().last().filter(|c| DETACHED.contains(c)) {
        trailing.push(c.to_string());
        core = &core[..core.len() - c.len_utf8()];
    }
    if !core.is_empty() {
        out.push(core.to_lowercase());
    }
    out.extend(trailing.into_iter().rev());
}
