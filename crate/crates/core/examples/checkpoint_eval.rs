//! Train briefly on a synthetic corpus, save the checkpoint, load it back and
//! score a fresh test corpus built from the same lexicons.
//!
//! cargo run --release --example checkpoint_eval

use memchain::checkpoint;
use memchain::data::{generate_synthetic, random_embeddings, split_validation, SyntheticSpec, Vocabulary};
use memchain::eval::{evaluate, report_to_csv};
use memchain::labeler::{label_corpus, LexiconSet};
use memchain::training::{train, TrainConfig, TrainData};

fn main() -> memchain::Result<()> {
    env_logger::init();
    let spec = SyntheticSpec::default();
    let (stories, lex) = generate_synthetic(160, 5, &spec);
    // same spec, so the word inventory matches; different seed, so new stories
    let (test, _) = generate_synthetic(64, 6, &spec);

    let all: Vec<_> = stories.iter().chain(&test).cloned().collect();
    let vocab = Vocabulary::from_stories(&all);
    let embeddings = random_embeddings(&vocab, 16, 1.0, 5);
    let labels = label_corpus(&stories, &LexiconSet::from_synthetic(&lex));
    let (train_set, val_set) = split_validation(&stories, 32);
    let cfg = TrainConfig {
        hidden_size: 16,
        epochs: 100,
        seeds: vec![1, 2],
        runs_per_seed: 1,
        ..Default::default()
    };
    let outcome = train(
        &TrainData {
            train: &train_set,
            validation: &val_set,
            labels: Some(&labels),
            vocab: &vocab,
            embeddings: &embeddings,
        },
        &cfg,
    )?;

    let dir = std::env::temp_dir().join("memchain-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("best.ckpt");
    checkpoint::save(&path, &outcome.best.model)?;
    let restored = checkpoint::load(&path)?;

    let before = evaluate(&outcome.best.model, &test, &vocab, &embeddings)?;
    let after = evaluate(&restored, &test, &vocab, &embeddings)?;
    println!(
        "selected seed {} epoch {} (validation {:.3})",
        outcome.best.seed, outcome.best.epoch, outcome.best.val_acc
    );
    println!("test accuracy {:.3} on {} stories", after.accuracy, after.n);
    println!("reloaded report identical: {}", report_to_csv(&before) == report_to_csv(&after));
    for line in report_to_csv(&after).lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
