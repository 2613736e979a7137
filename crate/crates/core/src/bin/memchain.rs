use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use memchain::data::{
    generate_synthetic, load_corpus, load_embeddings, random_embeddings, save_embeddings, split_validation,
    write_corpus, Story, SyntheticSpec, Vocabulary,
};
use memchain::eval::{self, Ablation};
use memchain::labeler::{self, LabelMap, LexiconPaths, LexiconSet};
use memchain::training::{self, TrainConfig, TrainData};
use memchain::{checkpoint, Error, Result};

#[derive(Parser)]
#[command(name = "memchain", version, about = "Semantically supervised memory chains for story-ending classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set alpha=0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<TrainConfig> {
        let mut cfg = match &self.config {
            Some(p) => TrainConfig::load(p)?,
            None => TrainConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{kv}` is not KEY=VALUE")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct LabelSource {
    /// Precomputed trigger labels (`id<TAB>aspect<TAB>bits`).
    #[arg(long, conflicts_with = "lexicons")]
    labels: Option<PathBuf>,
    /// Directory holding event.txt, sentiment.txt, negation.txt and topic.txt.
    #[arg(long)]
    lexicons: Option<PathBuf>,
}

impl LabelSource {
    fn resolve(&self, stories: &[Story]) -> Result<Option<LabelMap>> {
        if let Some(p) = &self.labels {
            let map = labeler::load_label_file(p)?;
            labeler::check_alignment(stories, &map)?;
            return Ok(Some(map));
        }
        if let Some(dir) = &self.lexicons {
            let lex = labeler::load_lexicons(&LexiconPaths::in_dir(dir))?;
            return Ok(Some(labeler::label_corpus(stories, &lex)));
        }
        Ok(None)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train with the seed/run protocol and keep the best validation checkpoint.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        corpus: PathBuf,
        /// Held-out stories; without it the last `validation_size` training stories are used.
        #[arg(long)]
        validation: Option<PathBuf>,
        #[arg(long)]
        embeddings: PathBuf,
        #[command(flatten)]
        labels: LabelSource,
        #[arg(long, default_value = "model.ckpt")]
        out: PathBuf,
        #[arg(long, default_value = "train_log.csv")]
        log: PathBuf,
    },
    /// Score a corpus with one or more checkpoints.
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "checkpoint", required = true)]
        checkpoints: Vec<PathBuf>,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        /// Per-story CSV report of the first checkpoint.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Retrain under configuration deltas and print the comparison table.
    Ablate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        validation: Option<PathBuf>,
        /// Stories the selected checkpoints are scored on (defaults to the validation set).
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        embeddings: PathBuf,
        #[command(flatten)]
        labels: LabelSource,
        /// bi-directionality, all-semantic-supervision, event-sequence,
        /// sentiment-trajectory, topical-consistency, free-chain. Repeatable.
        #[arg(long = "delta")]
        deltas: Vec<String>,
        /// Run all six deltas.
        #[arg(long, conflicts_with = "deltas")]
        all: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write trigger labels for a corpus from lexicon files.
    Label {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicons: PathBuf,
        #[arg(long, default_value = "labels.tsv")]
        out: PathBuf,
    },
    /// Dump BiGRU states of trigger tokens plus the chain keys as CSV.
    ExportVectors {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[command(flatten)]
        labels: LabelSource,
        #[arg(long, default_value_t = 500)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "vectors.csv")]
        out: PathBuf,
    },
    /// Generate a synthetic corpus with planted triggers, lexicons, labels and embeddings.
    GenSynthetic {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Embedding width; defaults to the configured hidden size.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value = "synthetic")]
        out_dir: PathBuf,
    },
    /// Compare analytic and finite-difference gradients of the full loss.
    GradCheck {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 8)]
        hidden: usize,
        #[arg(long, default_value_t = 6)]
        tokens: usize,
        #[arg(long, default_value_t = 3)]
        seed: u64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e.to_string().replace('\n', " "));
            ExitCode::from(match e {
                Error::Io { .. } => 3,
                Error::Parse { .. } => 4,
                Error::Numeric(_) => 5,
                _ => 2,
            })
        }
    }
}

fn corpus_and_vocab(paths: &[&Path]) -> Result<(Vec<Vec<Story>>, Vocabulary)> {
    let corpora = paths.iter().map(|p| load_corpus(p)).collect::<Result<Vec<_>>>()?;
    let all: Vec<Story> = corpora.iter().flatten().cloned().collect();
    Ok((corpora, Vocabulary::from_stories(&all)))
}

fn train_split(corpus: Vec<Story>, validation: Option<Vec<Story>>, cfg: &TrainConfig) -> (Vec<Story>, Vec<Story>) {
    match validation {
        Some(v) => (corpus, v),
        None => split_validation(&corpus, cfg.validation_size),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train {
            cfg,
            corpus,
            validation,
            embeddings,
            labels,
            out,
            log,
        } => {
            let cfg = cfg.resolve()?;
            let mut paths = vec![corpus.as_path()];
            paths.extend(validation.as_deref());
            let (mut corpora, vocab) = corpus_and_vocab(&paths)?;
            let val = (corpora.len() == 2).then(|| corpora.pop().unwrap());
            let (train_set, val_set) = train_split(corpora.pop().unwrap(), val, &cfg);
            let table = load_embeddings(&embeddings, &vocab)?;
            let all: Vec<Story> = train_set.iter().chain(&val_set).cloned().collect();
            let label_map = labels.resolve(&all)?;
            let data = TrainData {
                train: &train_set,
                validation: &val_set,
                labels: label_map.as_ref(),
                vocab: &vocab,
                embeddings: &table,
            };
            let outcome = training::train(&data, &cfg)?;
            checkpoint::save(&out, &outcome.best.model)?;
            write_text(&log, &training::log_to_csv(&outcome.log))?;
            println!(
                "best validation accuracy {:.4} (seed {}, run {}, epoch {}) -> {}",
                outcome.best.val_acc,
                outcome.best.seed,
                outcome.best.run,
                outcome.best.epoch,
                out.display()
            );
        }
        Command::Eval {
            cfg,
            checkpoints,
            corpus,
            embeddings,
            report,
        } => {
            cfg.resolve()?;
            let (mut corpora, vocab) = corpus_and_vocab(&[&corpus])?;
            let stories = corpora.pop().unwrap();
            let table = load_embeddings(&embeddings, &vocab)?;
            let mut reports = Vec::new();
            for path in &checkpoints {
                let model = checkpoint::load(path)?;
                let r = eval::evaluate(&model, &stories, &vocab, &table)?;
                println!("{}: accuracy {:.4} ({} stories)", path.display(), r.accuracy, r.n);
                reports.push(r);
            }
            let accs: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
            let mut first = reports.swap_remove(0);
            if accs.len() > 1 {
                let (mean, sd) = eval::mean_and_sd(&accs);
                first.sd = Some(sd);
                println!("mean accuracy {mean:.4} ± {sd:.4} over {} checkpoints", accs.len());
            }
            if let Some(p) = report {
                eval::write_report(&p, &first)?;
            }
        }
        Command::Ablate {
            cfg,
            corpus,
            validation,
            test,
            embeddings,
            labels,
            deltas,
            all,
            out,
        } => {
            let cfg = cfg.resolve()?;
            let deltas: Vec<Ablation> = if all {
                Ablation::ALL.to_vec()
            } else {
                deltas.iter().map(|d| d.parse()).collect::<Result<_>>()?
            };
            let mut paths = vec![corpus.as_path()];
            paths.extend(validation.as_deref());
            paths.extend(test.as_deref());
            let (mut corpora, vocab) = corpus_and_vocab(&paths)?;
            let test_set = test.is_some().then(|| corpora.pop().unwrap());
            let val = validation.is_some().then(|| corpora.pop().unwrap());
            let (train_set, val_set) = train_split(corpora.pop().unwrap(), val, &cfg);
            let table = load_embeddings(&embeddings, &vocab)?;
            let all_stories: Vec<Story> = train_set.iter().chain(&val_set).cloned().collect();
            let label_map = labels.resolve(&all_stories)?;
            let data = TrainData {
                train: &train_set,
                validation: &val_set,
                labels: label_map.as_ref(),
                vocab: &vocab,
                embeddings: &table,
            };
            let table_out = eval::ablate(&deltas, &data, test_set.as_deref().unwrap_or(&val_set), &cfg)?;
            print!("{}", table_out.to_text());
            if let Some(p) = out {
                write_text(&p, &table_out.to_csv())?;
            }
        }
        Command::Label { corpus, lexicons, out } => {
            let stories = load_corpus(&corpus)?;
            let lex = labeler::load_lexicons(&LexiconPaths::in_dir(&lexicons))?;
            let map = labeler::label_corpus(&stories, &lex);
            labeler::write_label_file(&out, &stories, &map)?;
            println!("labelled {} stories -> {}", stories.len(), out.display());
        }
        Command::ExportVectors {
            cfg,
            checkpoint: ckpt,
            corpus,
            embeddings,
            labels,
            cap,
            seed,
            out,
        } => {
            cfg.resolve()?;
            let (mut corpora, vocab) = corpus_and_vocab(&[&corpus])?;
            let stories = corpora.pop().unwrap();
            let table = load_embeddings(&embeddings, &vocab)?;
            let model = checkpoint::load(&ckpt)?;
            let map = labels
                .resolve(&stories)?
                .ok_or_else(|| Error::Config("export-vectors needs --labels or --lexicons".into()))?;
            let rows = eval::export_vectors(&model, &stories, &map, &vocab, &table, cap, seed)?;
            write_text(&out, &eval::vectors_to_csv(&rows, model.hidden()))?;
            println!("{} rows -> {}", rows.len(), out.display());
        }
        Command::GenSynthetic {
            cfg,
            n,
            seed,
            dim,
            out_dir,
        } => {
            let cfg = cfg.resolve()?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
                path: out_dir.display().to_string(),
                source: e,
            })?;
            let (stories, lex) = generate_synthetic(n, seed, &SyntheticSpec::default());
            let lexicons = LexiconSet::from_synthetic(&lex);
            let vocab = Vocabulary::from_stories(&stories);
            let table = random_embeddings(&vocab, dim.unwrap_or(cfg.hidden_size), 1.0, seed);
            write_corpus(&out_dir.join("corpus.tsv"), &stories)?;
            save_embeddings(&out_dir.join("embeddings.txt"), &vocab, &table)?;
            labeler::save_lexicons(&out_dir.join("lexicons"), &lexicons)?;
            let map = labeler::label_corpus(&stories, &lexicons);
            labeler::write_label_file(&out_dir.join("labels.tsv"), &stories, &map)?;
            println!("{n} stories, vocabulary {} -> {}", vocab.len(), out_dir.display());
        }
        Command::GradCheck {
            cfg,
            hidden,
            tokens,
            seed,
            tolerance,
        } => {
            cfg.resolve()?;
            let (names, report) = training::full_loss_grad_check(hidden, tokens, seed)?;
            for (name, c) in names.iter().zip(&report.params) {
                println!("{name:<16} {:.3e}", c.max_rel_err);
            }
            println!("max relative error {:.3e} (tolerance {tolerance:e})", report.max_rel_err());
            if !report.passes(tolerance) {
                return Err(Error::Numeric(format!(
                    "gradient check failed: max relative error {:.3e}",
                    report.max_rel_err()
                )));
            }
        }
    }
    Ok(())
}
