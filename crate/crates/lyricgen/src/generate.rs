//! Lyric generation: seed a context window, repeatedly sample the next word,
//! and render the result as a lyric sheet.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, TokenId, Vocab, UNK_TOKEN, VERSE_TOKEN};
use crate::error::{Error, Result};
use crate::nn::{forward_window, softmax, Mode, ModelParams};
use crate::rng::{seeded, Prng};

/// Decoding strategy. Sampling strategies are seeded and fully reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    /// Argmax with lowest-id tie break.
    Greedy,
    /// Sample from `softmax(ln p / tau)`.
    Temperature { tau: f64 },
    /// Renormalize the `k` most probable tokens, then temperature-sample.
    TopK { k: usize, tau: f64 },
}

impl Strategy {
    pub fn validate(&self) -> Result<()> {
        let tau = match self {
            Strategy::Greedy => return Ok(()),
            Strategy::Temperature { tau } => *tau,
            Strategy::TopK { k, tau } => {
                if *k < 1 {
                    return Err(Error::Config("top_k requires k >= 1".to_string()));
                }
                *tau
            }
        };
        if tau <= 0.0 || !tau.is_finite() {
            return Err(Error::Config("temperature must be positive".to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Greedy => write!(f, "greedy"),
            Strategy::Temperature { tau } => write!(f, "temperature(tau={tau})"),
            Strategy::TopK { k, tau } => write!(f, "top_k(k={k},tau={tau})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Number of tokens to generate.
    pub length: usize,
    pub strategy: Strategy,
    pub seed: u64,
    /// Genre label carried through to the output CSV.
    pub genre: Option<String>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            length: 100,
            strategy: Strategy::Temperature { tau: 1.0 },
            seed: 42,
            genre: None,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.length < 1 {
            return Err(Error::Config("length must be at least 1".to_string()));
        }
        self.strategy.validate()
    }
}

/// One generated lyric plus the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedLyric {
    pub seed: String,
    pub tokens: Vec<String>,
    pub rendered: String,
    pub genre: Option<String>,
    pub strategy: Strategy,
    pub seed_rng: u64,
}

/// Tokenize and encode a seed phrase into a model context. Shorter phrases are
/// left-padded by repeating the first id; longer ones keep the last `seq_len`
/// ids. Out-of-vocabulary words map to `<UNK>`.
pub fn prepare_seed(phrase: &str, vocab: &Vocab, seq_len: usize) -> Result<Vec<TokenId>> {
    let tokens = tokenize(phrase);
    if tokens.is_empty() {
        return Err(Error::Input(format!(
            "seed phrase {phrase:?} contains no tokens"
        )));
    }
    let ids = vocab.encode(&tokens);
    let mut context = Vec::with_capacity(seq_len);
    if ids.len() >= seq_len {
        context.extend_from_slice(&ids[ids.len() - seq_len..]);
    } else {
        context.resize(seq_len - ids.len(), ids[0]);
        context.extend_from_slice(&ids);
    }
    Ok(context)
}

/// Eval-mode forward over a full context; softmax of the final timestep.
pub fn next_token_dist(params: &ModelParams, context: &[TokenId]) -> Result<Vec<f64>> {
    if context.len() != params.seq_len {
        return Err(Error::Mismatch(format!(
            "context length {} != model seq_len {}",
            context.len(),
            params.seq_len
        )));
    }
    let (logits, _) = forward_window(params, context, Mode::Eval, &mut seeded(0))?;
    Ok(softmax(&logits))
}

/// Draw a token id from a probability vector according to the strategy.
pub fn sample_token(probs: &[f64], strategy: &Strategy, rng: &mut Prng) -> TokenId {
    match strategy {
        Strategy::Greedy => argmax(probs),
        Strategy::Temperature { tau } => sample_tempered(probs, *tau, rng),
        Strategy::TopK { k, tau } => {
            let mut order: Vec<TokenId> = (0..probs.len()).collect();
            // by probability descending, ties broken toward lower ids
            order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap().then(a.cmp(&b)));
            order.truncate(*k);
            let top: Vec<f64> = order.iter().map(|&id| probs[id]).collect();
            order[sample_tempered(&top, *tau, rng)]
        }
    }
}

fn argmax(probs: &[f64]) -> TokenId {
    let mut best = 0;
    for (id, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = id;
        }
    }
    best
}

fn sample_tempered(probs: &[f64], tau: f64, rng: &mut Prng) -> usize {
    // softmax(ln p / tau), i.e. p^(1/tau) renormalized
    let max_ln = probs
        .iter()
        .map(|p| p.ln() / tau)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = probs
        .iter()
        .map(|p| (p.ln() / tau - max_ln).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (id, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return id;
        }
    }
    weights.len() - 1
}

/// Generate `config.length` tokens from a seed phrase, sliding the context by
/// one each step, and render them as a lyric sheet.
pub fn generate(
    params: &ModelParams,
    vocab: &Vocab,
    seed_phrase: &str,
    config: &GenConfig,
) -> Result<GeneratedLyric> {
    config.validate()?;
    if vocab.size() != params.vocab_size() {
        return Err(Error::Mismatch(format!(
            "vocab size {} != model vocab size {}",
            vocab.size(),
            params.vocab_size()
        )));
    }
    let mut context = prepare_seed(seed_phrase, vocab, params.seq_len)?;
    let mut rng = seeded(config.seed);
    let mut tokens = Vec::with_capacity(config.length);
    for _ in 0..config.length {
        let probs = next_token_dist(params, &context)?;
        let id = sample_token(&probs, &config.strategy, &mut rng);
        tokens.push(
            vocab
                .token(id)
                .expect("sampled id is within vocab")
                .to_string(),
        );
        context.remove(0);
        context.push(id);
    }
    let rendered = render_lyric(&tokens);
    Ok(GeneratedLyric {
        seed: seed_phrase.to_string(),
        tokens,
        rendered,
        genre: config.genre.clone(),
        strategy: config.strategy.clone(),
        seed_rng: config.seed,
    })
}

const ATTACH_LEFT: [&str; 8] = [",", ".", "!", "?", ";", ":", ")", "\""];

/// Render tokens as display text: `<V>` becomes a line break, `<UNK>` an
/// ellipsis, punctuation re-attaches to the preceding word, and each line
/// starts uppercase.
pub fn render_lyric(tokens: &[String]) -> String {
    let mut lines: Vec<String> = vec![String::new()];
    let mut prev: Option<&str> = None;
    for token in tokens {
        if token == VERSE_TOKEN {
            lines.push(String::new());
            prev = None;
            continue;
        }
        let word = if token == UNK_TOKEN {
            "\u{2026}"
        } else {
            token
        };
        let line = lines.last_mut().expect("at least one line");
        if !line.is_empty() && !ATTACH_LEFT.contains(&word) && prev != Some("(") {
            line.push(' ');
        }
        line.push_str(word);
        prev = Some(word);
    }
    lines
        .iter()
        .map(|line| capitalize_first(line))
        .collect::<Vec<_>>()
        .join("\n")
}

fn capitalize_first(line: &str) -> String {
    match line.char_indices().find(|(_, c)| c.is_alphabetic()) {
        Some((idx, c)) if c.is_lowercase() => {
            let mut out = String::with_capacity(line.len());
            out.push_str(&line[..idx]);
            out.extend(c.to_uppercase());
            out.push_str(&line[idx + c.len_utf8()..]);
            out
        }
        _ => line.to_string(),
    }
}

/// Write generations as RFC-4180 CSV with header
/// `seed,genre,strategy,rng_seed,lyric`. Newlines inside the lyric are quoted
/// by the writer.
pub fn write_generations_csv(items: &[GeneratedLyric], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source: csv::Error| match source.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Input(format!("csv write failed: {other:?}")),
    };
    let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
    writer
        .write_record(["seed", "genre", "strategy", "rng_seed", "lyric"])
        .map_err(io_err)?;
    for item in items {
        writer
            .write_record([
                item.seed.as_str(),
                item.genre.as_deref().unwrap_or(""),
                &item.strategy.to_string(),
                &item.seed_rng.to_string(),
                item.rendered.as_str(),
            ])
            .map_err(io_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_vocab() -> Vocab {
        let words: Vec<String> = ["hello", "world", "sun", "rain"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Vocab::build(&[words])
    }

    #[test]
    fn short_seed_left_pads_with_first_id() {
        let vocab = tiny_vocab();
        let h = vocab.id("hello").unwrap();
        assert_eq!(prepare_seed("hello", &vocab, 4).unwrap(), vec![h, h, h, h]);
    }

    #[test]
    fn long_seed_keeps_last_ids() {
        let vocab = tiny_vocab();
        let ids = prepare_seed("hello world sun rain hello world", &vocab, 4).unwrap();
        let expect: Vec<usize> = ["sun", "rain", "hello", "world"]
            .iter()
            .map(|w| vocab.id(w).unwrap())
            .collect();
        assert_eq!(ids, expect);
    }

    #[test]
    fn oov_seed_becomes_unk() {
        let vocab = tiny_vocab();
        assert_eq!(prepare_seed("xyzzy", &vocab, 4).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn unusable_seed_is_an_input_error() {
        let vocab = tiny_vocab();
        assert!(matches!(
            prepare_seed("   ", &vocab, 4),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn zero_model_distribution_is_uniform() {
        let vocab = tiny_vocab();
        let params = ModelParams::zeros(vocab.size(), 3, 3, 2, 0.0, 4);
        let probs = next_token_dist(&params, &[2, 3, 4, 5]).unwrap();
        for p in &probs {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_takes_argmax_with_low_id_ties() {
        let mut rng = seeded(0);
        assert_eq!(
            sample_token(&[0.1, 0.7, 0.2], &Strategy::Greedy, &mut rng),
            1
        );
        assert_eq!(sample_token(&[0.5, 0.5], &Strategy::Greedy, &mut rng), 0);
    }

    #[test]
    fn temperature_sampling_matches_distribution() {
        let mut rng = seeded(123);
        let strategy = Strategy::Temperature { tau: 1.0 };
        let n = 100_000;
        let mut ones = 0usize;
        for _ in 0..n {
            if sample_token(&[0.25, 0.75], &strategy, &mut rng) == 1 {
                ones += 1;
            }
        }
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.75).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn top_k_restricts_support() {
        let mut rng = seeded(5);
        let strategy = Strategy::TopK { k: 2, tau: 1.0 };
        for _ in 0..200 {
            let id = sample_token(&[0.05, 0.5, 0.05, 0.4], &strategy, &mut rng);
            assert!(id == 1 || id == 3);
        }
    }

    #[test]
    fn generation_has_requested_length_and_is_greedy_deterministic() {
        let vocab = tiny_vocab();
        let mut rng = seeded(31);
        let params = ModelParams::init(vocab.size(), 4, 4, 2, 0.0, 4, &mut rng);
        let config = GenConfig {
            length: 1,
            strategy: Strategy::Greedy,
            ..GenConfig::default()
        };
        let one = generate(&params, &vocab, "hello world", &config).unwrap();
        assert_eq!(one.tokens.len(), 1);

        let config = GenConfig {
            length: 24,
            strategy: Strategy::Greedy,
            ..GenConfig::default()
        };
        let a = generate(&params, &vocab, "hello world", &config).unwrap();
        let b = generate(&params, &vocab, "hello world", &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tokens.len(), 24);
    }

    #[test]
    fn rendering_hides_reserved_tokens_and_attaches_punctuation() {
        let tokens: Vec<String> = [
            "you", "take", "me", "down", ",", "<UNK>", "<V>", "spin", "me",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rendered = render_lyric(&tokens);
        assert_eq!(rendered, "You take me down, \u{2026}\nSpin me");
        assert!(!rendered.contains(VERSE_TOKEN));
        assert!(!rendered.contains(UNK_TOKEN));
    }

    #[test]
    fn generations_csv_round_trips() {
        let items = vec![GeneratedLyric {
            seed: "hello, there".to_string(),
            tokens: vec!["a".into()],
            rendered: "Line one, two\nLine three".to_string(),
            genre: Some("pop".to_string()),
            strategy: Strategy::Temperature { tau: 1.0 },
            seed_rng: 7,
        }];
        let file = tempfile::NamedTempFile::new().unwrap();
        write_generations_csv(&items, file.path()).unwrap();

        let mut reader = csv::Reader::from_path(file.path()).unwrap();
        assert_eq!(
            reader.headers().unwrap(),
            &csv::StringRecord::from(vec!["seed", "genre", "strategy", "rng_seed", "lyric"])
        );
        let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), 1);
        assert_eq!(&records[0][0], "hello, there");
        assert_eq!(&records[0][2], "temperature(tau=1)");
        assert_eq!(&records[0][4], "Line one, two\nLine three");
    }

    #[test]
    fn empty_generation_list_writes_header_only() {
        let file = tempfile::NamedTempFile::new().unwrap();
        write_generations_csv(&[], file.path()).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(GenConfig {
            length: 0,
            ..GenConfig::default()
        }
        .validate()
        .is_err());
        assert!(Strategy::Temperature { tau: 0.0 }.validate().is_err());
        assert!(Strategy::TopK { k: 0, tau: 1.0 }.validate().is_err());
    }
}
