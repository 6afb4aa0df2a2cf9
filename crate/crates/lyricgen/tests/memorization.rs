//! Memorization oracle: a tiny corpus must be fully learnable by the default
//! architecture, and greedy decoding must then reproduce the training
//! continuations.

use std::collections::HashMap;

use lyricgen::corpus::{make_windows, TokenId, Vocab};
use lyricgen::generate::{generate, next_token_dist, GenConfig, Strategy};
use lyricgen::train::{train, TrainConfig};

/// 54 tokens over 28 distinct words, built so that every 4-token context is
/// unique (checked below), which makes the continuation learnable exactly.
fn toy_sequence() -> Vec<usize> {
    let mut seq: Vec<usize> = (0..28).collect();
    seq.extend((0..28).step_by(2)); // 14
    seq.extend((1..28).step_by(3)); // 9
    seq.extend([3, 9, 15]); // 3 -> 54 total
    seq
}

fn toy_corpus() -> (Vocab, Vec<String>, Vec<TokenId>) {
    let words: Vec<String> = toy_sequence().iter().map(|i| format!("w{i}")).collect();
    let vocab = Vocab::build(std::slice::from_ref(&words));
    let ids = vocab.encode(&words);
    (vocab, words, ids)
}

#[test]
fn toy_contexts_are_unambiguous() {
    let (vocab, _, ids) = toy_corpus();
    assert_eq!(ids.len(), 54);
    assert_eq!(vocab.size(), 30);
    let windows = make_windows(&ids, 4);
    assert_eq!(windows.len(), 50);
    let mut seen: HashMap<&[usize], usize> = HashMap::new();
    for w in &windows {
        if let Some(&target) = seen.get(w.context.as_slice()) {
            assert_eq!(target, w.target, "ambiguous context {:?}", w.context);
        }
        seen.insert(&w.context, w.target);
    }
}

#[test]
fn epoch_losses_decrease_monotonically_in_most_runs() {
    let (vocab, _, ids) = toy_corpus();
    let windows = make_windows(&ids, 4);
    let mut monotone_runs = 0;
    for seed in 0..10u64 {
        let config = TrainConfig {
            epochs: 25,
            seed,
            ..TrainConfig::default()
        };
        let (_, history) = train(&config, &windows, &vocab).unwrap();
        let losses: Vec<f64> = history.epochs.iter().map(|e| e.mean_loss).collect();
        if losses[4..].windows(2).all(|w| w[1] <= w[0]) {
            monotone_runs += 1;
        }
    }
    assert!(
        monotone_runs >= 9,
        "losses non-increasing after epoch 5 in only {monotone_runs}/10 runs"
    );
}

#[test]
fn toy_corpus_is_memorized_at_default_settings() {
    let (vocab, _, ids) = toy_corpus();
    let windows = make_windows(&ids, 4);
    let config = TrainConfig {
        epochs: 200,
        ..TrainConfig::default()
    };
    let start = std::time::Instant::now();
    let (params, history) = train(&config, &windows, &vocab).unwrap();
    let final_loss = history.final_loss().unwrap();
    eprintln!(
        "memorization: {} epochs in {:.1}s, losses: first {:.4}, e50 {:.4}, e100 {:.4}, e150 {:.4}, final {:.4}",
        history.epochs.len(),
        start.elapsed().as_secs_f64(),
        history.epochs[0].mean_loss,
        history.epochs[49].mean_loss,
        history.epochs[99].mean_loss,
        history.epochs[149].mean_loss,
        final_loss,
    );
    assert!(final_loss < 0.1, "final mean loss {final_loss}");

    let correct = windows
        .iter()
        .filter(|w| {
            let probs = next_token_dist(&params, &w.context).unwrap();
            let argmax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            argmax == w.target
        })
        .count();
    eprintln!(
        "memorization: {correct}/{} windows reproduced",
        windows.len()
    );
    assert!(
        correct as f64 >= 0.95 * windows.len() as f64,
        "only {correct}/{} windows reproduced",
        windows.len()
    );

    // greedy generation from the first training context replays the song
    let (_, words, _) = toy_corpus();
    let seed = words[..4].join(" ");
    let config = GenConfig {
        length: 50,
        strategy: Strategy::Greedy,
        ..GenConfig::default()
    };
    let lyric = generate(&params, &vocab, &seed, &config).unwrap();
    let expected: Vec<String> = words[4..].to_vec();
    let matching = lyric
        .tokens
        .iter()
        .zip(&expected)
        .filter(|(a, b)| a == b)
        .count();
    eprintln!("memorization: greedy replay matched {matching}/50 tokens");
    assert!(
        matching as f64 >= 0.95 * expected.len() as f64,
        "greedy replay matched only {matching}/{}",
        expected.len()
    );
}
