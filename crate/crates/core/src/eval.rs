//! Pairwise evaluation, ablation tables and representation export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{EmbeddingTable, Ending, Story, Vocabulary};
use crate::error::{Error, Result};
use crate::labeler::{Aspect, LabelMap};
use crate::model::{Instance, Model};
use crate::tape::Tape;
use crate::training::{self, TrainConfig, TrainData};

#[derive(Clone, Debug, PartialEq)]
pub struct StoryRecord {
    pub id: String,
    pub score_a: f64,
    pub score_b: f64,
    pub predicted: Ending,
    pub gold: Ending,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub n: usize,
    pub records: Vec<StoryRecord>,
    /// Population standard deviation across checkpoints, when several were scored.
    pub sd: Option<f64>,
}

/// Higher score wins; ties go to ending A.
pub fn predict(score_a: f64, score_b: f64) -> Ending {
    if score_b > score_a {
        Ending::B
    } else {
        Ending::A
    }
}

/// Scores both endings of every story with dropout off.
pub fn evaluate(model: &Model, stories: &[Story], vocab: &Vocabulary, table: &EmbeddingTable) -> Result<EvalReport> {
    if model.config.embed != table.dim() {
        return Err(Error::Config(format!(
            "checkpoint expects {}-d embeddings, table has {}",
            model.config.embed,
            table.dim()
        )));
    }
    let mut records = Vec::with_capacity(stories.len());
    let mut correct = 0usize;
    for s in stories {
        let context = vocab.encode(&s.context_tokens());
        let score = |ending: &[String]| -> Result<f64> {
            let inst = Instance {
                context: context.clone(),
                ending: vocab.encode(ending),
            };
            let mut tape = Tape::new();
            let (_, g) = model.forward(&mut tape, &inst, table, None)?;
            Ok(tape.scalar(g.y_hat))
        };
        let score_a = score(&s.ending_a)?;
        let score_b = score(&s.ending_b)?;
        let predicted = predict(score_a, score_b);
        correct += usize::from(predicted == s.gold);
        records.push(StoryRecord {
            id: s.id.clone(),
            score_a,
            score_b,
            predicted,
            gold: s.gold,
        });
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let n = stories.len();
    Ok(EvalReport {
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        n,
        records,
        sd: None,
    })
}

pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub const REPORT_HEADER: &str = "id,score_a,score_b,predicted,gold";

pub fn report_to_csv(report: &EvalReport) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in &report.records {
        writeln!(out, "{},{},{},{},{}", csv_field(&r.id), r.score_a, r.score_b, r.predicted, r.gold)
            .expect("string write");
    }
    out
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    fs::write(path, report_to_csv(report)).map_err(|e| Error::io(path, e))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A component switched off for an ablation run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ablation {
    Bidirectionality,
    AllSupervision,
    EventSequence,
    SentimentTrajectory,
    TopicalConsistency,
    FreeChain,
}

impl Ablation {
    pub const ALL: [Ablation; 6] = [
        Ablation::Bidirectionality,
        Ablation::AllSupervision,
        Ablation::EventSequence,
        Ablation::SentimentTrajectory,
        Ablation::TopicalConsistency,
        Ablation::FreeChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Bidirectionality => "bi-directionality",
            Ablation::AllSupervision => "all-semantic-supervision",
            Ablation::EventSequence => "event-sequence",
            Ablation::SentimentTrajectory => "sentiment-trajectory",
            Ablation::TopicalConsistency => "topical-consistency",
            Ablation::FreeChain => "free-chain",
        }
    }

    pub fn apply(self, cfg: &mut TrainConfig) {
        match self {
            Ablation::Bidirectionality => cfg.bidirectional = false,
            Ablation::AllSupervision => {
                cfg.supervise_event = false;
                cfg.supervise_sentiment = false;
                cfg.supervise_topic = false;
            }
            Ablation::EventSequence => cfg.supervise_event = false,
            Ablation::SentimentTrajectory => cfg.supervise_sentiment = false,
            Ablation::TopicalConsistency => cfg.supervise_topic = false,
            Ablation::FreeChain => cfg.free_chain = false,
        }
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().trim_start_matches(['-', '—', '–']).trim().replace([' ', '_'], "-").to_lowercase();
        let key = key.strip_prefix("no-").unwrap_or(&key);
        let found = match key {
            "bi-directionality" | "bidirectionality" | "bidirectional" => Ablation::Bidirectionality,
            "all-semantic-supervision" | "all-supervision" | "supervision" => Ablation::AllSupervision,
            "event-sequence" | "event" => Ablation::EventSequence,
            "sentiment-trajectory" | "sentiment" => Ablation::SentimentTrajectory,
            "topical-consistency" | "topic" => Ablation::TopicalConsistency,
            "free-chain" | "free" => Ablation::FreeChain,
            _ => {
                let valid: Vec<&str> = Ablation::ALL.iter().map(|a| a.name()).collect();
                return Err(Error::Config(format!(
                    "unknown ablation `{s}` (valid: {})",
                    valid.join(", ")
                )));
            }
        };
        Ok(found)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub label: String,
    /// Per-seed accuracy in percent, from each seed's selected checkpoint.
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    /// True if any backward-direction parameter ever received a gradient.
    pub backward_used: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:>6}  {:>6}\n", "Model", "Acc.", "SD");
        for r in &self.rows {
            writeln!(out, "{:<width$}  {:>6.1}  {:>6}", r.label, r.mean, format!("±{:.1}", r.sd)).expect("string write");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,accuracy,sd,seeds\n");
        for r in &self.rows {
            let accs: Vec<String> = r.accuracies.iter().map(f64::to_string).collect();
            writeln!(out, "{},{},{},{}", csv_field(&r.label), r.mean, r.sd, accs.join(";")).expect("string write");
        }
        out
    }
}

/// Trains the full model and one variant per delta under the same seeds and
/// split, scoring each seed's selected checkpoint on `eval_set`.
pub fn ablate(
    deltas: &[Ablation],
    data: &TrainData<'_>,
    eval_set: &[Story],
    cfg: &TrainConfig,
) -> Result<AblationTable> {
    let mut variants = vec![("full model".to_string(), cfg.clone())];
    for d in deltas {
        let mut c = cfg.clone();
        d.apply(&mut c);
        variants.push((format!("-{}", d.name()), c));
    }
    let mut rows = Vec::with_capacity(variants.len());
    for (label, c) in variants {
        log::info!("ablation variant {label}");
        let outcome = training::train(data, &c)?;
        let mut accuracies = Vec::with_capacity(outcome.per_seed.len());
        for rb in &outcome.per_seed {
            accuracies.push(100.0 * evaluate(&rb.model, eval_set, data.vocab, data.embeddings)?.accuracy);
        }
        let backward_used = outcome
            .best
            .model
            .backward_param_indices()
            .iter()
            .any(|&i| outcome.touched[i]);
        let (mean, sd) = mean_and_sd(&accuracies);
        rows.push(AblationRow {
            label,
            accuracies,
            mean,
            sd,
            backward_used,
        });
    }
    Ok(AblationTable { rows })
}

/// One exported vector: a context token occurrence or a key.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorRow {
    pub token: String,
    pub aspects: String,
    pub values: Vec<f64>,
}

pub const KEY_TOKEN: &str = "<key>";

/// Dumps BiGRU states of aspect-triggering tokens (at most `cap` sampled per
/// aspect) followed by one row per memory-chain key.
pub fn export_vectors(
    model: &Model,
    stories: &[Story],
    labels: &LabelMap,
    vocab: &Vocabulary,
    table: &EmbeddingTable,
    cap: usize,
    seed: u64,
) -> Result<Vec<VectorRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks: Vec<(usize, usize, Aspect)> = Vec::new();
    for aspect in Aspect::ALL {
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for (si, s) in stories.iter().enumerate() {
            if let Some(l) = labels.get(&s.id) {
                candidates.extend(l.get(aspect).iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| (si, i)));
            }
        }
        candidates.shuffle(&mut rng);
        candidates.truncate(cap);
        candidates.sort_unstable();
        picks.extend(candidates.into_iter().map(|(s, i)| (s, i, aspect)));
    }
    // a token picked for several aspects becomes one row tagged with all of them
    let mut by_story: BTreeMap<usize, BTreeMap<usize, Vec<Aspect>>> = BTreeMap::new();
    for (s, i, a) in picks {
        by_story.entry(s).or_default().entry(i).or_default().push(a);
    }
    let mut rows = Vec::new();
    for (si, wanted) in by_story {
        let s = &stories[si];
        let tokens = s.context_tokens();
        let ids = vocab.encode(&tokens);
        let mut tape = Tape::new();
        let vars = model.register(&mut tape);
        let xs: Vec<_> = ids
            .iter()
            .map(|&id| tape.constant(crate::Tensor::vector(table.row(id).to_vec())))
            .collect();
        let states = model.encode_tokens(&mut tape, &vars, &xs)?;
        for (i, aspects) in wanted {
            let Some(state) = states.get(i) else {
                return Err(Error::Contract(format!("labels for story {} exceed its context", s.id)));
            };
            let tags: Vec<&str> = aspects.iter().map(|a| a.name()).collect();
            rows.push(VectorRow {
                token: tokens[i].to_string(),
                aspects: tags.join(";"),
                values: tape.value(*state).data().to_vec(),
            });
        }
    }
    for (j, role) in model.config.chains.iter().enumerate() {
        rows.push(VectorRow {
            token: KEY_TOKEN.into(),
            aspects: format!("key:{role}"),
            values: model.params.tensors()[model.key_index(j)].data().to_vec(),
        });
    }
    Ok(rows)
}

pub fn vectors_to_csv(rows: &[VectorRow], hidden: usize) -> String {
    let mut out = String::from("token,aspects");
    for k in 1..=hidden {
        write!(out, ",v{k}").expect("string write");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&csv_field(&r.token));
        out.push(',');
        out.push_str(&csv_field(&r.aspects));
        for v in &r.values {
            write!(out, ",{v}").expect("string write");
        }
        out.push('\n');
    }
    out
}
