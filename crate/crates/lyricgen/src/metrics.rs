//! Text-overlap metrics: Jaccard similarity over unique tokens, ROUGE-1
//! recall with multiset clipping, and sentence BLEU with brevity penalty,
//! plus corpus-level evaluation of prediction/reference pairs.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{tokenize, UNK_TOKEN, VERSE_TOKEN};
use crate::error::{Error, Result};

/// Unique tokens of a text with reserved tokens excluded.
pub type TokenSet = BTreeSet<String>;

/// Tokens used for metric computation: the corpus tokenizer with `<V>` and
/// `<UNK>` stripped.
pub fn metric_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t != VERSE_TOKEN && t != UNK_TOKEN)
        .collect()
}

pub fn token_set(tokens: &[String]) -> TokenSet {
    tokens
        .iter()
        .filter(|t| t.as_str() != VERSE_TOKEN && t.as_str() != UNK_TOKEN)
        .cloned()
        .collect()
}

/// `|pred intersect ref| / |pred union ref|`. Two empty sets score 1.0 by
/// convention (identical texts).
pub fn jaccard(pred: &TokenSet, reference: &TokenSet) -> f64 {
    if pred.is_empty() && reference.is_empty() {
        return 1.0;
    }
    let intersection = pred.intersection(reference).count();
    let union = pred.union(reference).count();
    intersection as f64 / union as f64
}

/// Fraction of reference unigrams found in the prediction, with multiset
/// clipping: each reference occurrence can match at most one prediction
/// occurrence.
pub fn rouge1_recall(pred: &[String], reference: &[String]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Input("rouge1_recall: empty reference".to_string()));
    }
    let mut available: HashMap<&str, usize> = HashMap::new();
    for token in pred {
        *available.entry(token.as_str()).or_insert(0) += 1;
    }
    let mut matched = 0usize;
    for token in reference {
        if let Some(count) = available.get_mut(token.as_str()) {
            if *count > 0 {
                *count -= 1;
                matched += 1;
            }
        }
    }
    Ok(matched as f64 / reference.len() as f64)
}

/// How zero n-gram precisions enter the BLEU geometric mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// `ln p_n` floored at -700, which collapses the score to underflow scale.
    None,
    /// Zero-match precisions become 1e-9.
    AddEpsilon,
}

const LN_FLOOR: f64 = -700.0;
const EPSILON: f64 = 1e-9;

/// Sentence BLEU against a single reference: brevity penalty times the
/// geometric mean of clipped n-gram precisions. Orders run from 1 up to
/// `min(max_n, |pred|)` so short identical pairs still score 1.0; each order
/// weighs `1/orders`.
pub fn bleu(
    pred: &[String],
    reference: &[String],
    max_n: usize,
    smoothing: Smoothing,
) -> Result<f64> {
    if pred.is_empty() || reference.is_empty() {
        return Err(Error::Input("bleu: empty input".to_string()));
    }
    assert!(max_n >= 1, "max_n must be at least 1");
    let orders = max_n.min(pred.len());
    let mut acc = 0.0;
    for n in 1..=orders {
        let total = pred.len() - n + 1;
        let matches = clipped_ngram_matches(pred, reference, n);
        acc += if matches > 0 {
            (matches as f64 / total as f64).ln()
        } else {
            match smoothing {
                Smoothing::None => LN_FLOOR,
                Smoothing::AddEpsilon => EPSILON.ln(),
            }
        };
    }
    let brevity = if pred.len() < reference.len() {
        (1.0 - reference.len() as f64 / pred.len() as f64).exp()
    } else {
        1.0
    };
    Ok(brevity * (acc / orders as f64).exp())
}

fn clipped_ngram_matches(pred: &[String], reference: &[String], n: usize) -> usize {
    if reference.len() < n {
        return 0;
    }
    let mut available: HashMap<&[String], usize> = HashMap::new();
    for gram in reference.windows(n) {
        *available.entry(gram).or_insert(0) += 1;
    }
    let mut matched = 0usize;
    for gram in pred.windows(n) {
        if let Some(count) = available.get_mut(gram) {
            if *count > 0 {
                *count -= 1;
                matched += 1;
            }
        }
    }
    matched
}

/// Scores of one prediction/reference pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairScores {
    pub bleu: f64,
    pub rouge1_r: f64,
    pub jaccard: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub sum: f64,
    pub max: f64,
    pub min: f64,
}

impl Aggregate {
    fn over(values: impl Iterator<Item = f64> + Clone) -> Aggregate {
        let sum: f64 = values.clone().sum();
        let count = values.clone().count();
        Aggregate {
            mean: sum / count as f64,
            sum,
            max: values.clone().fold(f64::NEG_INFINITY, f64::max),
            min: values.fold(f64::INFINITY, f64::min),
        }
    }
}

/// Per-pair scores plus mean/sum/max/min aggregates for each metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub pairs: Vec<PairScores>,
    pub bleu: Aggregate,
    pub rouge1_r: Aggregate,
    pub jaccard: Aggregate,
}

impl MetricReport {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }
}

/// Tokenize and score every (prediction, reference) text pair. BLEU uses
/// `max_n = 4` and no smoothing, matching the astronomically small scores a
/// disjoint pair produces.
pub fn evaluate_corpus(pairs: &[(String, String)]) -> Result<MetricReport> {
    evaluate_corpus_with(pairs, 4, Smoothing::None)
}

pub fn evaluate_corpus_with(
    pairs: &[(String, String)],
    max_n: usize,
    smoothing: Smoothing,
) -> Result<MetricReport> {
    if pairs.is_empty() {
        return Err(Error::Input("no prediction/reference pairs".to_string()));
    }
    let mut scores = Vec::with_capacity(pairs.len());
    for (idx, (pred_text, ref_text)) in pairs.iter().enumerate() {
        let pred = metric_tokens(pred_text);
        let reference = metric_tokens(ref_text);
        let with_pair = |e: Error| Error::Input(format!("pair {idx}: {e}"));
        scores.push(PairScores {
            bleu: bleu(&pred, &reference, max_n, smoothing).map_err(with_pair)?,
            rouge1_r: rouge1_recall(&pred, &reference).map_err(with_pair)?,
            jaccard: jaccard(&token_set(&pred), &token_set(&reference)),
        });
    }
    Ok(MetricReport {
        bleu: Aggregate::over(scores.iter().map(|s| s.bleu)),
        rouge1_r: Aggregate::over(scores.iter().map(|s| s.rouge1_r)),
        jaccard: Aggregate::over(scores.iter().map(|s| s.jaccard)),
        pairs: scores,
    })
}

/// Per-pair CSV: `pair_id,bleu,rouge1_r,jaccard`.
pub fn write_report_csv(report: &MetricReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("pair_id,bleu,rouge1_r,jaccard\n");
    for (idx, pair) in report.pairs.iter().enumerate() {
        out.push_str(&format!(
            "{idx},{:e},{},{}\n",
            pair.bleu, pair.rouge1_r, pair.jaccard
        ));
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// JSON summary of the aggregates.
pub fn write_summary_json(report: &MetricReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let summary = serde_json::json!({
        "pairs": report.count(),
        "bleu": report.bleu,
        "rouge1_r": report.rouge1_r,
        "jaccard": report.jaccard,
    });
    fs::write(
        path,
        serde_json::to_string_pretty(&summary).expect("serializes"),
    )
    .map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
