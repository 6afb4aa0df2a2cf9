//! Word <-> id vocabulary.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::tokenize::UNK_TOKEN;
use super::verse::VERSE_TOKEN;
use crate::error::{Error, Result};

pub type TokenId = usize;

pub const UNK_ID: TokenId = 0;
pub const VERSE_ID: TokenId = 1;

/// Bijective token <-> id map. Ids are dense in `[0, size)`; id 0 is `<UNK>`
/// and id 1 is `<V>`, remaining ids follow first appearance in the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    word_to_id: HashMap<String, TokenId>,
    id_to_word: Vec<String>,
}

impl Vocab {
    /// Enumerate every distinct token of the corpus, reserved tokens first.
    pub fn build(corpus: &[Vec<String>]) -> Vocab {
        let mut vocab = Vocab {
            word_to_id: HashMap::new(),
            id_to_word: Vec::new(),
        };
        vocab.intern(UNK_TOKEN);
        vocab.intern(VERSE_TOKEN);
        for song in corpus {
            for token in song {
                vocab.intern(token);
            }
        }
        vocab
    }

    /// Rebuild a vocabulary from tokens listed in id order (checkpoint load).
    pub fn from_id_order(tokens: Vec<String>) -> Result<Vocab> {
        let mut word_to_id = HashMap::with_capacity(tokens.len());
        for (id, token) in tokens.iter().enumerate() {
            if word_to_id.insert(token.clone(), id).is_some() {
                return Err(Error::InvalidVocab(format!("duplicate token `{token}`")));
            }
        }
        let vocab = Vocab {
            word_to_id,
            id_to_word: tokens,
        };
        vocab.check_reserved()?;
        Ok(vocab)
    }

    fn check_reserved(&self) -> Result<()> {
        if self.token(UNK_ID) != Some(UNK_TOKEN) || self.token(VERSE_ID) != Some(VERSE_TOKEN) {
            return Err(Error::InvalidVocab(format!(
                "reserved tokens must be {UNK_TOKEN}=0 and {VERSE_TOKEN}=1"
            )));
        }
        Ok(())
    }

    fn intern(&mut self, token: &str) -> TokenId {
        if let Some(&id) = self.word_to_id.get(token) {
            return id;
        }
        let id = self.id_to_word.len();
        self.id_to_word.push(token.to_string());
        self.word_to_id.insert(token.to_string(), id);
        id
    }

    pub fn size(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.word_to_id.get(token).copied()
    }

    /// Id of `token`, or the `<UNK>` id when out of vocabulary.
    pub fn id_or_unk(&self, token: &str) -> TokenId {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.id_to_word.get(id).map(String::as_str)
    }

    /// All tokens in id order.
    pub fn tokens(&self) -> &[String] {
        &self.id_to_word
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<TokenId> {
        tokens.iter().map(|t| self.id_or_unk(t)).collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Result<Vec<String>> {
        ids.iter()
            .map(|&id| {
                self.token(id).map(String::from).ok_or(Error::OutOfRange {
                    what: "decode",
                    id,
                    bound: self.size(),
                })
            })
            .collect()
    }

    /// Write the vocabulary as a JSON object mapping token -> id.
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let map: std::collections::BTreeMap<&str, usize> = self
            .id_to_word
            .iter()
            .enumerate()
            .map(|(id, tok)| (tok.as_str(), id))
            .collect();
        let json = serde_json::to_string_pretty(&map).expect("vocab serializes");
        fs::write(path, json).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Vocab> {
        let path = path.as_ref();
        let data = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let map: HashMap<String, usize> = serde_json::from_str(&data)
            .map_err(|e| Error::InvalidVocab(format!("{}: {e}", path.display())))?;
        let mut id_to_word = vec![String::new(); map.len()];
        for (token, id) in &map {
            if *id >= id_to_word.len() {
                return Err(Error::InvalidVocab(format!(
                    "ids are not dense: {token} -> {id} with size {}",
                    id_to_word.len()
                )));
            }
            id_to_word[*id] = token.clone();
        }
        Vocab::from_id_order(id_to_word)
    }
}
