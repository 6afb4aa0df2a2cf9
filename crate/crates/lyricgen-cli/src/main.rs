//! `lyricgen` — train and sample a genre-conditioned lyric model.
//!
//! Subcommands: `prepare` (CSV -> corpus + vocab), `train` (corpus ->
//! checkpoint), `generate` (checkpoint -> lyric CSV), `evaluate`
//! (prediction/reference pairs -> metric report).
//!
//! Exit codes: 0 success, 2 usage/validation (including missing inputs and
//! schema errors), 3 data errors (malformed rows, corrupt files), 4 numeric
//! errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use lyricgen::corpus::{
    corpus_windows, filter_songs, load_song_table, preprocess, read_corpus, write_corpus, Vocab,
};
use lyricgen::error::{Error, Result};
use lyricgen::generate::{generate, write_generations_csv, GenConfig, Strategy};
use lyricgen::metrics::{evaluate_corpus_with, write_report_csv, write_summary_json, Smoothing};
use lyricgen::train::{load_checkpoint, train, TrainConfig};

#[derive(Parser)]
#[command(
    name = "lyricgen",
    version,
    about = "Genre-conditioned lyric generation pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a song CSV and write the tokenized corpus and vocabulary
    Prepare(PrepareArgs),
    /// Train the LSTM on a prepared corpus and write checkpoints
    Train(TrainArgs),
    /// Sample a lyric continuation from a trained checkpoint
    Generate(GenerateArgs),
    /// Score prediction/reference pairs with BLEU, ROUGE-1-R and Jaccard
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct PrepareArgs {
    /// Input song CSV (columns: lyrics, playlist_genre, language, ...)
    dataset: PathBuf,
    /// Keep only songs in this language (ISO-639-1)
    #[arg(long, default_value = "en")]
    language: String,
    /// Additionally keep only this playlist genre
    #[arg(long)]
    genre: Option<String>,
    /// Output corpus file (one song per line, tokens space-separated)
    #[arg(long, default_value = "corpus.txt")]
    out: PathBuf,
    /// Output vocabulary JSON (token -> id)
    #[arg(long, default_value = "vocab.json")]
    vocab: PathBuf,
    /// Window length used for the reported window count
    #[arg(long, default_value_t = 4)]
    seq_len: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// JSON config file; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Final checkpoint path (per-epoch checkpoints are written next to it)
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Training log path (default: checkpoint path with .log extension)
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    seq_len: Option<usize>,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Genre label recorded in the training log
    #[arg(long)]
    genre: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional max gradient norm
    #[arg(long)]
    grad_clip: Option<f64>,
    /// Fraction of windows held out for an eval-mode loss report
    #[arg(long)]
    holdout: Option<f64>,
    /// Worker threads (default: one per core); results do not depend on it
    #[arg(long)]
    threads: Option<usize>,
}

/// File form of the train configuration: every field optional, flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainFileConfig {
    corpus: Option<PathBuf>,
    vocab: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    log: Option<PathBuf>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    beta1: Option<f64>,
    beta2: Option<f64>,
    epsilon: Option<f64>,
    seq_len: Option<usize>,
    embed_dim: Option<usize>,
    hidden: Option<usize>,
    layers: Option<usize>,
    dropout_p: Option<f64>,
    genre: Option<String>,
    seed: Option<u64>,
    grad_clip: Option<f64>,
    holdout_fraction: Option<f64>,
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyName {
    Greedy,
    Temperature,
    TopK,
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON config file; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Phrase that seeds the context window
    #[arg(long)]
    seed_phrase: Option<String>,
    /// Number of tokens to generate
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    /// Sampling temperature for temperature/top-k strategies
    #[arg(long)]
    tau: Option<f64>,
    /// Candidate pool size for top-k
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Genre label recorded in the output CSV
    #[arg(long)]
    genre: Option<String>,
    /// Output CSV (seed,genre,strategy,rng_seed,lyric)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of lyrics to sample (seeds are seed, seed+1, ...)
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GenerateFileConfig {
    checkpoint: Option<PathBuf>,
    seed_phrase: Option<String>,
    length: Option<usize>,
    strategy: Option<String>,
    tau: Option<f64>,
    k: Option<usize>,
    seed: Option<u64>,
    genre: Option<String>,
    out: Option<PathBuf>,
    count: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SmoothingName {
    None,
    Epsilon,
}

#[derive(Args)]
struct EvaluateArgs {
    /// CSV with columns `prediction,reference`
    #[arg(long)]
    pairs: PathBuf,
    /// Per-pair report CSV (pair_id,bleu,rouge1_r,jaccard)
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    /// Aggregate summary JSON (default: report path with .json extension)
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Highest n-gram order for BLEU
    #[arg(long, default_value_t = 4)]
    max_n: usize,
    /// BLEU smoothing for zero-match precisions
    #[arg(long, value_enum, default_value_t = SmoothingName::None)]
    smoothing: SmoothingName,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prepare(args) => cmd_prepare(args),
        Command::Train(args) => cmd_train(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Input(_) | Error::MissingColumn(_) | Error::Io { .. } => 2,
        Error::Numeric(_) => 4,
        _ => 3,
    }
}

fn require(path: Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn read_json_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
}

fn cmd_prepare(args: PrepareArgs) -> Result<()> {
    let table = load_song_table(&args.dataset)?;
    let filtered = filter_songs(&table, &args.language, args.genre.as_deref());
    let (songs, vocab) = preprocess(&filtered);
    if args.seq_len < 1 {
        return Err(Error::Config("seq_len must be at least 1".to_string()));
    }
    let encoded: Vec<Vec<usize>> = songs.iter().map(|s| vocab.encode(s)).collect();
    let windows = corpus_windows(&encoded, args.seq_len);
    write_corpus(&songs, &args.out)?;
    vocab.save_json(&args.vocab)?;
    println!(
        "songs: {}\nvocab: {}\nwindows: {}\ncorpus: {}\nvocab file: {}",
        filtered.len(),
        vocab.size(),
        windows.len(),
        args.out.display(),
        args.vocab.display(),
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let file: TrainFileConfig = match &args.config {
        Some(path) => read_json_config(path)?,
        None => TrainFileConfig::default(),
    };
    let defaults = TrainConfig::default();
    let corpus_path = require(args.corpus.or(file.corpus), "corpus")?;
    let vocab_path = require(args.vocab.or(file.vocab), "vocab")?;
    let checkpoint = require(args.checkpoint.or(file.checkpoint), "checkpoint")?;
    let log_path = args
        .log
        .or(file.log)
        .unwrap_or_else(|| checkpoint.with_extension("log"));

    let config = TrainConfig {
        epochs: args.epochs.or(file.epochs).unwrap_or(defaults.epochs),
        batch_size: args
            .batch_size
            .or(file.batch_size)
            .unwrap_or(defaults.batch_size),
        learning_rate: args
            .learning_rate
            .or(file.learning_rate)
            .unwrap_or(defaults.learning_rate),
        beta1: file.beta1.unwrap_or(defaults.beta1),
        beta2: file.beta2.unwrap_or(defaults.beta2),
        epsilon: file.epsilon.unwrap_or(defaults.epsilon),
        seq_len: args.seq_len.or(file.seq_len).unwrap_or(defaults.seq_len),
        embed_dim: args
            .embed_dim
            .or(file.embed_dim)
            .unwrap_or(defaults.embed_dim),
        hidden: args.hidden.or(file.hidden).unwrap_or(defaults.hidden),
        layers: args.layers.or(file.layers).unwrap_or(defaults.layers),
        dropout_p: args
            .dropout
            .or(file.dropout_p)
            .unwrap_or(defaults.dropout_p),
        genre: args.genre.or(file.genre),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        checkpoint: Some(checkpoint.clone()),
        grad_clip: args.grad_clip.or(file.grad_clip),
        holdout_fraction: args
            .holdout
            .or(file.holdout_fraction)
            .unwrap_or(defaults.holdout_fraction),
    };
    configure_threads(args.threads.or(file.threads))?;

    let songs = read_corpus(&corpus_path)?;
    let vocab = Vocab::load_json(&vocab_path)?;
    let encoded: Vec<Vec<usize>> = songs.iter().map(|s| vocab.encode(s)).collect();
    let windows = corpus_windows(&encoded, config.seq_len);

    let (_, history) = train(&config, &windows, &vocab)?;

    let log = history.log_lines();
    fs::write(&log_path, &log).map_err(|source| Error::Io {
        path: log_path.clone(),
        source,
    })?;
    print!("{log}");
    for stats in &history.epochs {
        if let Some(holdout) = stats.holdout_loss {
            println!("epoch {} holdout_loss {holdout:.6}", stats.epoch);
        }
    }
    println!("checkpoint: {}", checkpoint.display());
    println!("log: {}", log_path.display());
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n < 1 {
            return Err(Error::Config("threads must be at least 1".to_string()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let file: GenerateFileConfig = match &args.config {
        Some(path) => read_json_config(path)?,
        None => GenerateFileConfig::default(),
    };
    let checkpoint = require(args.checkpoint.or(file.checkpoint), "checkpoint")?;
    let seed_phrase = args
        .seed_phrase
        .or(file.seed_phrase)
        .ok_or_else(|| Error::Config("--seed-phrase is required".to_string()))?;
    let out = args.out.or(file.out).unwrap_or_else(|| "gens.csv".into());
    let count = args.count.or(file.count).unwrap_or(1);
    if count < 1 {
        return Err(Error::Config("count must be at least 1".to_string()));
    }

    let defaults = GenConfig::default();
    let strategy_name = match args.strategy {
        Some(name) => Some(name),
        None => match file.strategy.as_deref() {
            None => None,
            Some("greedy") => Some(StrategyName::Greedy),
            Some("temperature") => Some(StrategyName::Temperature),
            Some("top_k") | Some("top-k") => Some(StrategyName::TopK),
            Some(other) => {
                return Err(Error::Config(format!("unknown strategy {other:?}")));
            }
        },
    };
    let tau = args.tau.or(file.tau).unwrap_or(1.0);
    let k = args.k.or(file.k).unwrap_or(10);
    let strategy = match strategy_name {
        None => defaults.strategy,
        Some(StrategyName::Greedy) => Strategy::Greedy,
        Some(StrategyName::Temperature) => Strategy::Temperature { tau },
        Some(StrategyName::TopK) => Strategy::TopK { k, tau },
    };
    let base_config = GenConfig {
        length: args.length.or(file.length).unwrap_or(defaults.length),
        strategy,
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        genre: args.genre.or(file.genre),
    };

    let (params, vocab, _) = load_checkpoint(&checkpoint)?;
    let mut lyrics = Vec::with_capacity(count);
    for i in 0..count {
        let config = GenConfig {
            seed: base_config.seed + i as u64,
            ..base_config.clone()
        };
        let lyric = generate(&params, &vocab, &seed_phrase, &config)?;
        println!(
            "--- seed {:?} | strategy {} | rng {} ---",
            lyric.seed, lyric.strategy, lyric.seed_rng
        );
        println!("{}\n", lyric.rendered);
        lyrics.push(lyric);
    }
    write_generations_csv(&lyrics, &out)?;
    println!("wrote {} lyric(s) to {}", lyrics.len(), out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let pairs = read_pairs(&args.pairs)?;
    let smoothing = match args.smoothing {
        SmoothingName::None => Smoothing::None,
        SmoothingName::Epsilon => Smoothing::AddEpsilon,
    };
    if args.max_n < 1 {
        return Err(Error::Config("max_n must be at least 1".to_string()));
    }
    let report = evaluate_corpus_with(&pairs, args.max_n, smoothing)?;
    let summary_path = args
        .summary
        .unwrap_or_else(|| args.out.with_extension("json"));
    write_report_csv(&report, &args.out)?;
    write_summary_json(&report, &summary_path)?;
    println!(
        "pairs: {}\nbleu mean: {:e}\nrouge1_r mean: {:.6}\njaccard mean: {:.6}\nreport: {}\nsummary: {}",
        report.count(),
        report.bleu.mean,
        report.rouge1_r.mean,
        report.jaccard.mean,
        args.out.display(),
        summary_path.display(),
    );
    Ok(())
}

fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::MalformedRow {
            row: 1,
            msg: format!("{other:?}"),
        },
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedRow {
            row: 1,
            msg: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let pred_col = column("prediction")?;
    let ref_col = column("reference")?;
    let mut pairs = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let record = row.map_err(|e| Error::MalformedRow {
            row: i + 2,
            msg: e.to_string(),
        })?;
        pairs.push((
            record.get(pred_col).unwrap_or("").to_string(),
            record.get(ref_col).unwrap_or("").to_string(),
        ));
    }
    Ok(pairs)
}
