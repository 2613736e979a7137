//! Trains on 32 synthetic stories and reports training accuracy per epoch.
//!
//! cargo run --release --example overfit_synthetic -- [hidden] [epochs] [key=value ...]
//!
//! Extra `key=value` arguments override training config keys.

use memchain::data::{generate_synthetic, random_embeddings, SyntheticSpec, Vocabulary};
use memchain::eval::evaluate;
use memchain::labeler::{label_corpus, LexiconSet};
use memchain::training::{dataset_loss, train, TrainConfig, TrainData};

fn main() -> memchain::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().collect();
    let hidden: usize = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(32);
    let epochs: usize = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(200);

    let (stories, lex) = generate_synthetic(32, 7, &SyntheticSpec::default());
    let labels = label_corpus(&stories, &LexiconSet::from_synthetic(&lex));
    let vocab = Vocabulary::from_stories(&stories);
    let embeddings = random_embeddings(&vocab, hidden, 1.0, 7);
    let mut cfg = TrainConfig {
        hidden_size: hidden,
        epochs,
        seeds: vec![7],
        runs_per_seed: 1,
        ..Default::default()
    };
    for kv in args.iter().skip(3) {
        if let Some((k, v)) = kv.split_once('=') {
            cfg.set(k, v)?;
        }
    }
    let data = TrainData {
        train: &stories,
        validation: &stories,
        labels: Some(&labels),
        vocab: &vocab,
        embeddings: &embeddings,
    };
    let outcome = train(&data, &cfg)?;
    for row in outcome.log.iter().filter(|r| r.epoch % 10 == 0 || r.epoch == 1) {
        println!(
            "epoch {:>4}  loss {:.4}  pred {:.4}  gate {:.4}  train acc {:.3}",
            row.epoch, row.loss_total, row.loss_pred, row.loss_gate, row.val_acc
        );
    }
    let final_model = &outcome.last.model;
    let loss = dataset_loss(final_model, &stories, &data, &cfg)?;
    println!(
        "final model, no dropout: loss {:.4} (pred {:.4}, gate {:.4}), accuracy {:.3}",
        loss.total,
        loss.prediction,
        loss.gate,
        evaluate(final_model, &stories, &vocab, &embeddings)?.accuracy
    );
    let report = evaluate(&outcome.best.model, &stories, &vocab, &embeddings)?;
    println!(
        "best epoch {}: training accuracy {:.3}",
        outcome.best.epoch, report.accuracy
    );
    let last = outcome.log.last().expect("at least one epoch");
    println!("final logged loss {:.4}", last.loss_total);
    Ok(())
}
