//! The six ablation switches on a small synthetic corpus, each retrained under
//! the same seeds and split.
//!
//! cargo run --release --example ablation -- [epochs]

use memchain::data::{generate_synthetic, random_embeddings, split_validation, SyntheticSpec, Vocabulary};
use memchain::eval::{ablate, Ablation};
use memchain::labeler::{label_corpus, LexiconSet};
use memchain::training::{TrainConfig, TrainData};

fn main() -> memchain::Result<()> {
    env_logger::init();
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let (stories, lex) = generate_synthetic(96, 2, &SyntheticSpec::default());
    let labels = label_corpus(&stories, &LexiconSet::from_synthetic(&lex));
    let vocab = Vocabulary::from_stories(&stories);
    let embeddings = random_embeddings(&vocab, 8, 1.0, 2);
    let (train_set, val_set) = split_validation(&stories, 24);
    let data = TrainData {
        train: &train_set,
        validation: &val_set,
        labels: Some(&labels),
        vocab: &vocab,
        embeddings: &embeddings,
    };
    let cfg = TrainConfig {
        hidden_size: 8,
        epochs,
        seeds: vec![1, 2, 3],
        runs_per_seed: 1,
        ..Default::default()
    };
    let table = ablate(&Ablation::ALL, &data, &val_set, &cfg)?;
    print!("{}", table.to_text());
    for row in &table.rows {
        println!("{:<28} backward parameters updated: {}", row.label, row.backward_used);
    }
    Ok(())
}
