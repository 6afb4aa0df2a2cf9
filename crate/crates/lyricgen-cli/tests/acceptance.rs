//! Acceptance suite. Each test exercises one release criterion end to end and
//! prints a `PASS` line (visible with `--nocapture`):
//!
//! 1. verse splitting reproduces the reference example token-for-token
//! 2. full-dataset statistics (runs only when the Spotify CSV is present)
//! 3. analytic gradients match central differences to 1e-4
//! 4. Adam matches the hand-evaluated recurrence to 1e-12
//! 5. a 50-window toy corpus is memorized at default settings
//! 6. BLEU/ROUGE/Jaccard agree exactly with a brute-force oracle
//! 7. cross-entropy of uniform logits is ln V to 1e-12
//! 8. training and greedy generation are bitwise deterministic
//! 9. the prepare -> train -> generate -> evaluate pipeline runs clean

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lyricgen::corpus::{
    filter_songs, load_song_table, make_windows, split_verses, tokenize, Vocab, WindowExample,
};
use lyricgen::generate::{generate, next_token_dist, GenConfig, Strategy};
use lyricgen::metrics::{bleu, jaccard, rouge1_recall, token_set, Smoothing, TokenSet};
use lyricgen::nn::{grad_check, Gradients, ModelParams};
use lyricgen::rng::seeded;
use lyricgen::train::{adam_step, cross_entropy, train, AdamState, TrainConfig};

use rand::Rng;

fn pass(n: usize, name: &str) {
    println!("ACCEPTANCE {n} ({name}): PASS");
}

// --- 1. preprocessing fidelity --------------------------------------------

#[test]
fn acceptance_1_preprocessing_fidelity() {
    let input = "When darkness falls, may it be That we should see the light \
                 When reaper calls, may it be That we walk straight and right \
                 When doubt returns, may it be That faith shall permeate our scars";
    let expected = "When darkness falls, may it be <V> That we should see the light \
                    <V> When reaper calls, may it be <V> That we walk straight and right \
                    <V> When doubt returns, may it be <V> That faith shall permeate our scars";
    assert_eq!(split_verses(input), expected);
    pass(1, "preprocessing fidelity");
}

// --- 2. dataset statistics (optional, needs the full Kaggle CSV) ----------

#[test]
fn acceptance_2_dataset_statistics() {
    let path = std::env::var("SPOTIFY_SONGS_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|_| {
            Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/spotify_songs.csv")
        });
    if !path.exists() {
        println!(
            "ACCEPTANCE 2 (dataset statistics): SKIPPED ({} not present; set SPOTIFY_SONGS_CSV)",
            path.display()
        );
        return;
    }
    let table = load_song_table(&path).unwrap();
    let english = filter_songs(&table, "en", None);
    assert_eq!(english.len(), 15405, "english songs");
    let by_genre = |genre: &str| filter_songs(&table, "en", Some(genre)).len();
    assert_eq!(by_genre("pop"), 3739, "pop songs");
    assert_eq!(by_genre("latin"), 857, "latin songs");
    assert_eq!(by_genre("edm"), 1758, "edm songs");
    pass(2, "dataset statistics");
}

// --- 3. gradient correctness -----------------------------------------------

#[test]
fn acceptance_3_gradient_correctness() {
    for seed in 0..5u64 {
        let mut rng = seeded(seed);
        let params = ModelParams::init(7, 3, 3, 2, 0.0, 4, &mut rng);
        let example = WindowExample {
            context: (0..4).map(|_| rng.gen_range(0..7)).collect(),
            target: rng.gen_range(0..7),
        };
        let err = grad_check(&params, &example, 1e-5).unwrap();
        assert!(err < 1e-4, "seed {seed}: max relative error {err}");
    }
    pass(3, "gradient correctness");
}

// --- 4. optimizer correctness ----------------------------------------------

#[test]
fn acceptance_4_optimizer_correctness() {
    // scalar trace, one step with g = 1 from theta = 1
    let mut params = ModelParams::zeros(1, 1, 1, 1, 0.0, 1);
    params.b_out[0] = 1.0;
    let mut state = AdamState::new(&params, 1e-3, 0.9, 0.999, 1e-8);
    let mut grads = Gradients::zeros_like(&params);
    grads.b_out[0] = 1.0;
    adam_step(&mut params, &grads, &mut state).unwrap();
    // hand recurrence: m=0.1, v=0.001, m_hat=v_hat=1
    let m_hat = (0.1f64) / (1.0 - 0.9);
    let v_hat = (0.001f64) / (1.0 - 0.999);
    let expected = 1.0 - 1e-3 * m_hat / (v_hat.sqrt() + 1e-8);
    assert!(
        (params.b_out[0] - expected).abs() < 1e-12,
        "theta {} vs hand {expected}",
        params.b_out[0]
    );
    assert!((params.b_out[0] - 0.999).abs() < 1e-9);

    // zero gradient is a bitwise identity
    let mut rng = seeded(2);
    let mut params = ModelParams::init(6, 3, 3, 2, 0.0, 4, &mut rng);
    let before = params.clone();
    let zero = Gradients::zeros_like(&params);
    let mut state = AdamState::new(&params, 1e-3, 0.9, 0.999, 1e-8);
    adam_step(&mut params, &zero, &mut state).unwrap();
    for ((_, a), (_, b)) in params.tensors().into_iter().zip(before.tensors()) {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    pass(4, "optimizer correctness");
}

// --- 5. memorization oracle -------------------------------------------------

/// 54 tokens over 28 distinct words with no ambiguous 4-token context.
fn toy_corpus() -> (Vocab, Vec<String>, Vec<WindowExample>) {
    let mut seq: Vec<usize> = (0..28).collect();
    seq.extend((0..28).step_by(2));
    seq.extend((1..28).step_by(3));
    seq.extend([3, 9, 15]);
    let words: Vec<String> = seq.iter().map(|i| format!("w{i}")).collect();
    let vocab = Vocab::build(std::slice::from_ref(&words));
    let ids = vocab.encode(&words);
    let windows = make_windows(&ids, 4);
    assert_eq!(windows.len(), 50);
    let mut seen: HashMap<&[usize], usize> = HashMap::new();
    for w in &windows {
        if let Some(&t) = seen.get(w.context.as_slice()) {
            assert_eq!(t, w.target, "ambiguous context");
        }
        seen.insert(&w.context, w.target);
    }
    (vocab, words, windows)
}

#[test]
fn acceptance_5_memorization_oracle() {
    let (vocab, words, windows) = toy_corpus();
    let config = TrainConfig {
        epochs: 200,
        ..TrainConfig::default()
    };
    let started = std::time::Instant::now();
    let (params, history) = train(&config, &windows, &vocab).unwrap();
    let final_loss = history.final_loss().unwrap();
    assert!(final_loss < 0.1, "final mean loss {final_loss}");

    let reproduced = windows
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
    assert!(
        reproduced * 100 >= windows.len() * 95,
        "{reproduced}/{} windows reproduced",
        windows.len()
    );

    // greedy generation from a training prefix replays the continuation
    let lyric = generate(
        &params,
        &vocab,
        &words[..4].join(" "),
        &GenConfig {
            length: 50,
            strategy: Strategy::Greedy,
            ..GenConfig::default()
        },
    )
    .unwrap();
    let matched = lyric
        .tokens
        .iter()
        .zip(&words[4..])
        .filter(|(a, b)| a == b)
        .count();
    assert!(
        matched * 100 >= 46 * 95,
        "greedy replay matched {matched}/50"
    );

    println!(
        "ACCEPTANCE 5 (memorization oracle): PASS (loss {final_loss:.4}, {reproduced}/50 windows, replay {matched}/50, {:.0}s)",
        started.elapsed().as_secs_f64()
    );
}

// --- 6. metric oracle equivalence -------------------------------------------

/// Brute-force n-gram precision counting by position scans (no hash maps).
fn oracle_bleu(pred: &[String], reference: &[String], max_n: usize) -> f64 {
    let orders = max_n.min(pred.len());
    let mut acc = 0.0;
    for n in 1..=orders {
        let pred_grams: Vec<&[String]> = pred.windows(n).collect();
        let ref_grams: Vec<&[String]> = reference.windows(n).collect();
        let mut matched = 0usize;
        for (i, gram) in pred_grams.iter().enumerate() {
            if pred_grams[..i].contains(gram) {
                continue; // already counted this distinct gram
            }
            let in_pred = pred_grams.iter().filter(|g| g == &gram).count();
            let in_ref = ref_grams.iter().filter(|g| g == &gram).count();
            matched += in_pred.min(in_ref);
        }
        acc += if matched > 0 {
            (matched as f64 / pred_grams.len() as f64).ln()
        } else {
            -700.0
        };
    }
    let brevity = if pred.len() < reference.len() {
        (1.0 - reference.len() as f64 / pred.len() as f64).exp()
    } else {
        1.0
    };
    brevity * (acc / orders as f64).exp()
}

fn oracle_rouge1_recall(pred: &[String], reference: &[String]) -> f64 {
    let mut matched = 0usize;
    for (i, token) in reference.iter().enumerate() {
        if reference[..i].contains(token) {
            continue;
        }
        let in_ref = reference.iter().filter(|t| t == &token).count();
        let in_pred = pred.iter().filter(|t| t == &token).count();
        matched += in_ref.min(in_pred);
    }
    matched as f64 / reference.len() as f64
}

fn oracle_jaccard(pred: &[String], reference: &[String]) -> f64 {
    let mut union: Vec<&String> = Vec::new();
    let mut intersection = 0usize;
    for token in pred.iter().chain(reference) {
        if !union.contains(&token) {
            union.push(token);
            let in_pred = pred.contains(token);
            let in_ref = reference.contains(token);
            if in_pred && in_ref {
                intersection += 1;
            }
        }
    }
    intersection as f64 / union.len() as f64
}

#[test]
fn acceptance_6_metric_oracle_equivalence() {
    let alphabet = ["a", "b", "c"];
    let mut sequences: Vec<Vec<String>> = Vec::new();
    let mut frontier: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..6 {
        let mut next = Vec::new();
        for seq in &frontier {
            for sym in alphabet {
                let mut longer = seq.clone();
                longer.push(sym.to_string());
                next.push(longer);
            }
        }
        sequences.extend(next.iter().cloned());
        frontier = next;
    }
    assert_eq!(sequences.len(), 3 + 9 + 27 + 81 + 243 + 729);

    let sets: Vec<TokenSet> = sequences.iter().map(|s| token_set(s)).collect();
    let mut checked = 0usize;
    for (i, pred) in sequences.iter().enumerate() {
        for (j, reference) in sequences.iter().enumerate() {
            let b = bleu(pred, reference, 4, Smoothing::None).unwrap();
            let r = rouge1_recall(pred, reference).unwrap();
            let jac = jaccard(&sets[i], &sets[j]);
            assert_eq!(
                b,
                oracle_bleu(pred, reference, 4),
                "bleu {pred:?} {reference:?}"
            );
            assert_eq!(
                r,
                oracle_rouge1_recall(pred, reference),
                "rouge {pred:?} {reference:?}"
            );
            assert_eq!(
                jac,
                oracle_jaccard(pred, reference),
                "jaccard {pred:?} {reference:?}"
            );
            if i == j {
                assert_eq!((b, r, jac), (1.0, 1.0, 1.0), "identity pair");
            }
            let disjoint = sets[i].intersection(&sets[j]).count() == 0;
            if disjoint {
                assert_eq!(jac, 0.0);
                assert_eq!(r, 0.0);
                assert!(b <= 1e-100, "disjoint bleu {b}");
            }
            checked += 1;
        }
    }
    println!("ACCEPTANCE 6 (metric oracle equivalence): PASS ({checked} pairs)");
}

// --- 7. loss sanity ----------------------------------------------------------

#[test]
fn acceptance_7_loss_sanity() {
    for v in [2usize, 4, 1000] {
        let logits = vec![1.25; v];
        for target in [0, v - 1] {
            let loss = cross_entropy(&logits, target).unwrap();
            assert!(
                (loss - (v as f64).ln()).abs() < 1e-12,
                "V={v} target={target}: {loss}"
            );
        }
    }
    pass(7, "loss sanity");
}

// --- 8. determinism -----------------------------------------------------------

#[test]
fn acceptance_8_determinism() {
    let (vocab, words, windows) = toy_corpus();
    let dir = tempfile::tempdir().unwrap();
    let config_for = |name: &str| TrainConfig {
        epochs: 4,
        hidden: 24,
        embed_dim: 24,
        layers: 2,
        seed: 1234,
        checkpoint: Some(dir.path().join(name)),
        ..TrainConfig::default()
    };

    // two identical runs -> bitwise-identical checkpoint files
    train(&config_for("a.ckpt"), &windows, &vocab).unwrap();
    train(&config_for("b.ckpt"), &windows, &vocab).unwrap();
    let bytes_a = fs::read(dir.path().join("a.ckpt")).unwrap();
    assert_eq!(bytes_a, fs::read(dir.path().join("b.ckpt")).unwrap());

    // thread count must not matter
    for threads in [1usize, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let name = format!("t{threads}.ckpt");
        pool.install(|| train(&config_for(&name), &windows, &vocab).unwrap());
        assert_eq!(
            bytes_a,
            fs::read(dir.path().join(&name)).unwrap(),
            "{threads} threads"
        );
    }

    // greedy generation is a pure function of (params, seed phrase)
    let (params, _) = train(&config_for("c.ckpt"), &windows, &vocab).unwrap();
    let config = GenConfig {
        length: 40,
        strategy: Strategy::Greedy,
        ..GenConfig::default()
    };
    let seed_phrase = words[..4].join(" ");
    let one = generate(&params, &vocab, &seed_phrase, &config).unwrap();
    let two = generate(&params, &vocab, &seed_phrase, &config).unwrap();
    assert_eq!(one, two);
    pass(8, "determinism");
}

// --- 9. end-to-end demo ---------------------------------------------------------

#[test]
fn acceptance_9_end_to_end_demo() {
    let started = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_lyricgen");
    let dataset = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini_songs.csv");
    let corpus = dir.path().join("corpus.txt");
    let vocab = dir.path().join("vocab.json");
    let ckpt = dir.path().join("model.ckpt");
    let gens = dir.path().join("gens.csv");
    let report = dir.path().join("report.csv");

    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().expect("runs");
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8_lossy(&out.stdout).to_string()
    };

    let prepared = run(&[
        "prepare",
        dataset.to_str().unwrap(),
        "--language",
        "en",
        "--out",
        corpus.to_str().unwrap(),
        "--vocab",
        vocab.to_str().unwrap(),
    ]);
    assert!(prepared.contains("songs: 17"), "{prepared}");

    // paper-default training: 3 epochs, 3x128 LSTM, dropout 0.2, batch 64
    run(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--vocab",
        vocab.to_str().unwrap(),
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--seed",
        "42",
    ]);
    let log = fs::read_to_string(ckpt.with_extension("log")).unwrap();
    assert_eq!(log.lines().count(), 3, "one log line per epoch:\n{log}");

    run(&[
        "generate",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--seed-phrase",
        "hold me close",
        "--length",
        "100",
        "--strategy",
        "temperature",
        "--tau",
        "1.0",
        "--seed",
        "9",
        "--genre",
        "pop",
        "--out",
        gens.to_str().unwrap(),
    ]);
    let mut reader = csv::Reader::from_path(&gens).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        &csv::StringRecord::from(vec!["seed", "genre", "strategy", "rng_seed", "lyric"])
    );
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 1);
    let lyric = records[0].get(4).unwrap();
    let token_count = lyric.matches('\n').count()
        + lyric
            .lines()
            .map(|line| tokenize(line).len())
            .sum::<usize>();
    assert_eq!(token_count, 100, "lyric token count; lyric:\n{lyric}");

    // score the generation against the seed song's lyrics
    let reference = fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    let pairs = dir.path().join("pairs.csv");
    let mut writer = csv::Writer::from_path(&pairs).unwrap();
    writer.write_record(["prediction", "reference"]).unwrap();
    writer.write_record([lyric, &reference]).unwrap();
    writer.flush().unwrap();
    let evaluated = run(&[
        "evaluate",
        "--pairs",
        pairs.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(evaluated.contains("pairs: 1"), "{evaluated}");
    assert!(report.exists());
    assert!(report.with_extension("json").exists());

    println!(
        "ACCEPTANCE 9 (end-to-end demo): PASS ({:.0}s)",
        started.elapsed().as_secs_f64()
    );
}
