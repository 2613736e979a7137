//! Gate supervision on/off on a 256-story synthetic corpus, over 5 seeds.
//!
//! cargo run --release --example supervision_efficacy -- [hidden] [epochs] [key=value ...]

use memchain::data::{generate_synthetic, random_embeddings, split_validation, SyntheticSpec, Vocabulary};
use memchain::eval::mean_and_sd;
use memchain::labeler::{label_corpus, LexiconSet};
use memchain::training::{train, TrainConfig, TrainData};

fn main() -> memchain::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().collect();
    let hidden: usize = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(16);
    let epochs: usize = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(100);

    let (stories, lex) = generate_synthetic(256, 11, &SyntheticSpec::default());
    let labels = label_corpus(&stories, &LexiconSet::from_synthetic(&lex));
    let vocab = Vocabulary::from_stories(&stories);
    let embeddings = random_embeddings(&vocab, hidden, 1.0, 11);
    let (train_set, val_set) = split_validation(&stories, 56);
    let data = TrainData {
        train: &train_set,
        validation: &val_set,
        labels: Some(&labels),
        vocab: &vocab,
        embeddings: &embeddings,
    };

    let mut base = TrainConfig {
        hidden_size: hidden,
        epochs,
        seeds: vec![1, 2, 3, 4, 5],
        runs_per_seed: 1,
        ..Default::default()
    };
    for kv in args.iter().skip(3) {
        if let Some((k, v)) = kv.split_once('=') {
            base.set(k, v)?;
        }
    }

    for alpha in [base.alpha, 0.0] {
        let cfg = TrainConfig { alpha, ..base.clone() };
        let outcome = train(&data, &cfg)?;
        let accs: Vec<f64> = outcome.per_seed.iter().map(|s| 100.0 * s.val_acc).collect();
        let (mean, sd) = mean_and_sd(&accs);
        println!("alpha {alpha}: validation accuracy {mean:.1} ± {sd:.1}  per seed {accs:?}");
        for seed in &cfg.seeds {
            let gates: Vec<String> = outcome
                .log
                .iter()
                .filter(|r| r.seed == *seed && r.epoch <= 10)
                .map(|r| format!("{:.3}", r.loss_gate))
                .collect();
            println!("  seed {seed} gate BCE, epochs 1-10: {}", gates.join(" "));
        }
    }
    Ok(())
}
