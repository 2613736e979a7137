//! Export BiGRU states of aspect-triggering tokens and the chain keys, ready
//! for an external t-SNE or UMAP projection.
//!
//! cargo run --release --example export_vectors -- [out.csv]

use memchain::data::{generate_synthetic, random_embeddings, split_validation, SyntheticSpec, Vocabulary};
use memchain::eval::{export_vectors, vectors_to_csv};
use memchain::labeler::{label_corpus, LexiconSet};
use memchain::training::{train, TrainConfig, TrainData};

fn main() -> memchain::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "vectors.csv".into());
    let (stories, lex) = generate_synthetic(96, 9, &SyntheticSpec::default());
    let labels = label_corpus(&stories, &LexiconSet::from_synthetic(&lex));
    let vocab = Vocabulary::from_stories(&stories);
    let embeddings = random_embeddings(&vocab, 12, 1.0, 9);
    let (train_set, val_set) = split_validation(&stories, 16);
    let cfg = TrainConfig {
        hidden_size: 12,
        epochs: 15,
        seeds: vec![1],
        runs_per_seed: 1,
        ..Default::default()
    };
    let data = TrainData {
        train: &train_set,
        validation: &val_set,
        labels: Some(&labels),
        vocab: &vocab,
        embeddings: &embeddings,
    };
    let model = train(&data, &cfg)?.best.model;

    let rows = export_vectors(&model, &stories, &labels, &vocab, &embeddings, 50, 0)?;
    std::fs::write(&out, vectors_to_csv(&rows, model.hidden())).expect("write vectors");
    let mut counts = std::collections::BTreeMap::new();
    for r in &rows {
        for tag in r.aspects.split(';') {
            *counts.entry(tag.to_string()).or_insert(0) += 1;
        }
    }
    println!("{} rows written to {out}", rows.len());
    for (tag, n) in counts {
        println!("  {tag:<16} {n}");
    }
    Ok(())
}
