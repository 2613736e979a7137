//! Composite loss, FTRL-Proximal updates and the multi-seed training loop.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Ending, EmbeddingTable, Story, Vocabulary};
use crate::error::{Error, Result};
use crate::eval;
use crate::gradcheck::{grad_check, GradCheckReport, DEFAULT_STEP};
use crate::labeler::{check_alignment, Aspect, LabelMap, TriggerLabels};
use crate::model::{ChainRole, DropoutMasks, ForwardGraph, Instance, Model, ModelConfig};
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

/// Training hyper-parameters. Field names double as config-file keys.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub alpha: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub lambda: f64,
    pub dropout_embedding: f64,
    pub dropout_chain: f64,
    pub dropout_classifier: f64,
    pub seeds: Vec<u64>,
    pub runs_per_seed: usize,
    pub supervise_event: bool,
    pub supervise_sentiment: bool,
    pub supervise_topic: bool,
    pub bidirectional: bool,
    pub free_chain: bool,
    pub hidden_size: usize,
    pub ftrl_beta: f64,
    pub ftrl_l1: f64,
    pub ftrl_l2: f64,
    pub validation_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.5,
            learning_rate: 0.1,
            batch_size: 128,
            epochs: 200,
            lambda: 0.001,
            dropout_embedding: 0.5,
            dropout_chain: 0.2,
            dropout_classifier: 0.2,
            seeds: vec![1, 2, 3, 4, 5],
            runs_per_seed: 5,
            supervise_event: true,
            supervise_sentiment: true,
            supervise_topic: true,
            bidirectional: true,
            free_chain: true,
            hidden_size: 300,
            ftrl_beta: 0.001,
            ftrl_l1: 0.0,
            ftrl_l2: 0.0,
            validation_size: 188,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value `{value}` for `{key}`: {e}")))
}

impl TrainConfig {
    pub const KEYS: [&'static str; 20] = [
        "alpha",
        "learning_rate",
        "batch_size",
        "epochs",
        "lambda",
        "dropout_embedding",
        "dropout_chain",
        "dropout_classifier",
        "seeds",
        "runs_per_seed",
        "supervise_event",
        "supervise_sentiment",
        "supervise_topic",
        "bidirectional",
        "free_chain",
        "hidden_size",
        "ftrl_beta",
        "ftrl_l1",
        "ftrl_l2",
        "validation_size",
    ];

    /// Sets one field from its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "alpha" => self.alpha = parse_value(key, v)?,
            "learning_rate" => self.learning_rate = parse_value(key, v)?,
            "batch_size" => self.batch_size = parse_value(key, v)?,
            "epochs" => self.epochs = parse_value(key, v)?,
            "lambda" => self.lambda = parse_value(key, v)?,
            "dropout_embedding" => self.dropout_embedding = parse_value(key, v)?,
            "dropout_chain" => self.dropout_chain = parse_value(key, v)?,
            "dropout_classifier" => self.dropout_classifier = parse_value(key, v)?,
            "seeds" => {
                self.seeds = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_value(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "runs_per_seed" => self.runs_per_seed = parse_value(key, v)?,
            "supervise_event" => self.supervise_event = parse_value(key, v)?,
            "supervise_sentiment" => self.supervise_sentiment = parse_value(key, v)?,
            "supervise_topic" => self.supervise_topic = parse_value(key, v)?,
            "bidirectional" => self.bidirectional = parse_value(key, v)?,
            "free_chain" => self.free_chain = parse_value(key, v)?,
            "hidden_size" => self.hidden_size = parse_value(key, v)?,
            "ftrl_beta" => self.ftrl_beta = parse_value(key, v)?,
            "ftrl_l1" => self.ftrl_l1 = parse_value(key, v)?,
            "ftrl_l2" => self.ftrl_l2 = parse_value(key, v)?,
            "validation_size" => self.validation_size = parse_value(key, v)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown config key `{other}` (valid keys: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected `key = value`, got `{line}`")))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn to_text(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("string write");
        kv("alpha", self.alpha.to_string());
        kv("learning_rate", self.learning_rate.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("epochs", self.epochs.to_string());
        kv("lambda", self.lambda.to_string());
        kv("dropout_embedding", self.dropout_embedding.to_string());
        kv("dropout_chain", self.dropout_chain.to_string());
        kv("dropout_classifier", self.dropout_classifier.to_string());
        kv("seeds", seeds.join(","));
        kv("runs_per_seed", self.runs_per_seed.to_string());
        kv("supervise_event", self.supervise_event.to_string());
        kv("supervise_sentiment", self.supervise_sentiment.to_string());
        kv("supervise_topic", self.supervise_topic.to_string());
        kv("bidirectional", self.bidirectional.to_string());
        kv("free_chain", self.free_chain.to_string());
        kv("hidden_size", self.hidden_size.to_string());
        kv("ftrl_beta", self.ftrl_beta.to_string());
        kv("ftrl_l1", self.ftrl_l1.to_string());
        kv("ftrl_l2", self.ftrl_l2.to_string());
        kv("validation_size", self.validation_size.to_string());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let rate_ok = |r: f64| (0.0..1.0).contains(&r);
        if !(self.alpha >= 0.0) {
            return Err(Error::Config("alpha must be >= 0".into()));
        }
        if !(rate_ok(self.dropout_embedding) && rate_ok(self.dropout_chain) && rate_ok(self.dropout_classifier)) {
            return Err(Error::Config("dropout rates must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.runs_per_seed == 0 || self.hidden_size == 0 {
            return Err(Error::Config("batch_size, runs_per_seed and hidden_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.lambda >= 0.0) {
            return Err(Error::Config("learning_rate must be > 0 and lambda >= 0".into()));
        }
        if !(self.ftrl_beta >= 0.0 && self.ftrl_l1 >= 0.0 && self.ftrl_l2 >= 0.0) {
            return Err(Error::Config("ftrl_beta, ftrl_l1 and ftrl_l2 must be >= 0".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    pub fn supervises(&self, aspect: Aspect) -> bool {
        match aspect {
            Aspect::Event => self.supervise_event,
            Aspect::Sentiment => self.supervise_sentiment,
            Aspect::Topic => self.supervise_topic,
        }
    }

    pub fn any_supervision(&self) -> bool {
        Aspect::ALL.iter().any(|a| self.supervises(*a))
    }

    pub fn model_config(&self, embed: usize) -> ModelConfig {
        ModelConfig::new(self.hidden_size, embed, self.free_chain, self.bidirectional)
    }

    pub fn dropout_rates(&self) -> [f64; 3] {
        [self.dropout_embedding, self.dropout_chain, self.dropout_classifier]
    }

    pub fn ftrl(&self) -> FtrlConfig {
        FtrlConfig {
            learning_rate: self.learning_rate,
            beta: self.ftrl_beta,
            l1: self.ftrl_l1,
            l2: self.ftrl_l2,
        }
    }
}

/// Loss nodes and their plain values for one instance.
#[derive(Clone, Copy, Debug)]
pub struct LossParts {
    pub total: Var,
    pub total_value: f64,
    pub prediction: f64,
    /// Mean gate BCE over supervised (token, chain) pairs, before `alpha`.
    pub gate: f64,
    /// `lambda * ||R||^2`.
    pub regularizer: f64,
}

/// Chains whose gates are supervised under `cfg`.
pub fn supervised_chains(model: &Model, cfg: &TrainConfig) -> Vec<(usize, Aspect)> {
    model
        .config
        .chains
        .iter()
        .enumerate()
        .filter_map(|(j, role)| match role {
            ChainRole::Aspect(a) if cfg.supervises(*a) => Some((j, *a)),
            _ => None,
        })
        .collect()
}

/// `BCE(y, y_hat) + alpha * mean BCE(l, g) + lambda * ||R||^2`.
///
/// The gate term averages over context positions and supervised chains; the
/// free chain never receives gate loss. With `alpha = 0` the gate term is
/// reported but kept off the tape.
pub fn compute_loss(
    tape: &mut Tape,
    model: &Model,
    vars: &[Var],
    graph: &ForwardGraph,
    target: f64,
    labels: Option<&TriggerLabels>,
    cfg: &TrainConfig,
) -> Result<LossParts> {
    let pred = tape.bce(graph.y_hat, target)?;
    let mut total = pred;
    let supervised = supervised_chains(model, cfg);
    let mut gate_value = 0.0;
    if !supervised.is_empty() {
        if let Some(labels) = labels {
            if labels.len() != graph.chains.gates.len() {
                return Err(Error::Contract(format!(
                    "labels cover {} tokens but the gate matrix has {} rows",
                    labels.len(),
                    graph.chains.gates.len()
                )));
            }
            let mut terms = Vec::with_capacity(labels.len() * supervised.len());
            for (i, row) in graph.chains.gates.iter().enumerate() {
                for &(j, aspect) in &supervised {
                    let target = if labels.get(aspect)[i] { 1.0 } else { 0.0 };
                    terms.push(tape.bce(row[j], target)?);
                }
            }
            let stacked = tape.stack(&terms)?;
            let sum = tape.sum(stacked);
            let mean = tape.mul_const(sum, 1.0 / terms.len() as f64);
            gate_value = tape.scalar(mean);
            if cfg.alpha > 0.0 {
                let weighted = tape.mul_const(mean, cfg.alpha);
                total = tape.add(total, weighted)?;
            }
        } else if cfg.alpha > 0.0 {
            return Err(Error::Contract("gate supervision is enabled but no labels were given".into()));
        }
    }
    let mut reg_value = 0.0;
    if cfg.lambda > 0.0 {
        let sq = tape.sq_norm(vars[model.output_index()]);
        let reg = tape.mul_const(sq, cfg.lambda);
        reg_value = tape.scalar(reg);
        total = tape.add(total, reg)?;
    }
    Ok(LossParts {
        total,
        total_value: tape.scalar(total),
        prediction: tape.scalar(pred),
        gate: gate_value,
        regularizer: reg_value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FtrlConfig {
    pub learning_rate: f64,
    pub beta: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Per-coordinate FTRL-Proximal accumulators.
///
/// `z` is warm-started so that the closed-form weight reproduces the initial
/// parameters; without that the first update would discard the
/// initialisation. With `l1 = l2 = 0` each step is then exactly
/// `w -= lr * g / (beta + sqrt(n))`.
#[derive(Clone, Debug, PartialEq)]
pub struct FtrlState {
    pub config: FtrlConfig,
    pub z: Vec<Tensor>,
    pub n: Vec<Tensor>,
}

impl FtrlState {
    pub fn new(config: FtrlConfig, params: &[Tensor]) -> Self {
        let lr = config.learning_rate;
        let z = params
            .iter()
            .map(|p| {
                let mut z = p.clone();
                for w in z.data_mut() {
                    *w = if *w == 0.0 {
                        0.0
                    } else {
                        -*w * (config.beta / lr + config.l2) - w.signum() * config.l1
                    };
                }
                z
            })
            .collect();
        let n = params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        FtrlState { config, z, n }
    }
}

/// Applies one FTRL-Proximal step. Coordinates with a zero gradient are left
/// untouched. Any non-finite gradient aborts the step before anything moves.
pub fn ftrl_step(params: &mut [Tensor], names: &[String], grads: &[Tensor], state: &mut FtrlState) -> Result<()> {
    if grads.len() != params.len() {
        return Err(Error::Contract(format!(
            "{} gradients for {} parameters",
            grads.len(),
            params.len()
        )));
    }
    for (i, g) in grads.iter().enumerate() {
        if !g.is_finite() {
            return Err(Error::Numeric(names.get(i).cloned().unwrap_or_else(|| i.to_string())));
        }
        params[i].same_shape(g, "ftrl")?;
    }
    let FtrlConfig {
        learning_rate: lr,
        beta,
        l1,
        l2,
    } = state.config;
    for (pi, g) in grads.iter().enumerate() {
        let w = params[pi].data_mut();
        let z = state.z[pi].data_mut();
        let n = state.n[pi].data_mut();
        for (k, &gk) in g.data().iter().enumerate() {
            if gk == 0.0 {
                continue;
            }
            let n_new = n[k] + gk * gk;
            let sigma = (n_new.sqrt() - n[k].sqrt()) / lr;
            z[k] += gk - sigma * w[k];
            n[k] = n_new;
            w[k] = if z[k].abs() <= l1 {
                0.0
            } else {
                -(z[k] - z[k].signum() * l1) / ((beta + n_new.sqrt()) / lr + l2)
            };
        }
    }
    Ok(())
}

/// Everything `train` reads besides the config.
#[derive(Clone, Copy)]
pub struct TrainData<'a> {
    pub train: &'a [Story],
    pub validation: &'a [Story],
    pub labels: Option<&'a LabelMap>,
    pub vocab: &'a Vocabulary,
    pub embeddings: &'a EmbeddingTable,
}

/// One row of the training log.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRow {
    pub seed: u64,
    pub run: usize,
    pub epoch: usize,
    pub loss_total: f64,
    pub loss_pred: f64,
    pub loss_gate: f64,
    pub val_acc: f64,
}

pub const LOG_HEADER: &str = "seed,run,epoch,loss_total,loss_pred,loss_gate,val_acc";

pub fn log_to_csv(rows: &[LogRow]) -> String {
    let mut out = format!("{LOG_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.seed, r.run, r.epoch, r.loss_total, r.loss_pred, r.loss_gate, r.val_acc
        )
        .expect("string write");
    }
    out
}

/// A model captured at some epoch of some run.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub seed: u64,
    pub run: usize,
    pub epoch: usize,
    pub val_acc: f64,
    pub model: Model,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Highest validation accuracy over every run of every seed.
    pub best: Snapshot,
    /// Best run for each seed, in seed order.
    pub per_seed: Vec<Snapshot>,
    /// Model after the final epoch of the last run.
    pub last: Snapshot,
    pub log: Vec<LogRow>,
    /// Whether each parameter ever received a non-zero gradient.
    pub touched: Vec<bool>,
}

/// Precomputed vocabulary indices for one story.
struct Prepared<'a> {
    context: Vec<usize>,
    endings: [Vec<usize>; 2],
    gold: Ending,
    labels: Option<&'a TriggerLabels>,
}

fn prepare<'a>(stories: &[Story], data: &TrainData<'a>) -> Vec<Prepared<'a>> {
    stories
        .iter()
        .map(|s| Prepared {
            context: data.vocab.encode(&s.context_tokens()),
            endings: [data.vocab.encode(&s.ending_a), data.vocab.encode(&s.ending_b)],
            gold: s.gold,
            labels: data.labels.and_then(|l| l.get(&s.id)),
        })
        .collect()
}

/// Epoch statistics: mean total, prediction and gate loss over instances.
#[derive(Clone, Copy, Debug, Default)]
struct EpochLoss {
    total: f64,
    pred: f64,
    gate: f64,
}

fn run_epoch(
    model: &mut Model,
    state: &mut FtrlState,
    stories: &[Prepared<'_>],
    data: &TrainData<'_>,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    touched: &mut [bool],
) -> Result<EpochLoss> {
    let mut order: Vec<(usize, usize)> = (0..stories.len()).flat_map(|s| [(s, 0), (s, 1)]).collect();
    order.shuffle(rng);
    let mut sums = EpochLoss::default();
    let rates = cfg.dropout_rates();
    for batch in order.chunks(cfg.batch_size) {
        let mut acc: Vec<Tensor> = model.params.tensors().iter().map(|t| Tensor::zeros(t.shape())).collect();
        for &(si, ei) in batch {
            let story = &stories[si];
            let instance = Instance {
                context: story.context.clone(),
                ending: story.endings[ei].clone(),
            };
            let target = if (ei == 0) == (story.gold == Ending::A) { 1.0 } else { 0.0 };
            let masks = DropoutMasks::sample(rng, model.config.embed, model.config.hidden, rates);
            let mut tape = Tape::new();
            let (vars, graph) = model.forward(&mut tape, &instance, data.embeddings, Some(&masks))?;
            let loss = compute_loss(&mut tape, model, &vars, &graph, target, story.labels, cfg)?;
            let grads = tape.backward(loss.total)?;
            for (a, g) in acc.iter_mut().zip(&grads.grads) {
                a.axpy(1.0, g);
            }
            sums.total += loss.total_value;
            sums.pred += loss.prediction;
            sums.gate += loss.gate;
        }
        let scale = 1.0 / batch.len() as f64;
        for (t, g) in touched.iter_mut().zip(acc.iter_mut()) {
            g.scale_in_place(scale);
            *t |= g.data().iter().any(|v| *v != 0.0);
        }
        let names = model.params.names().to_vec();
        ftrl_step(model.params.tensors_mut(), &names, &acc, state)?;
    }
    let n = order.len() as f64;
    Ok(EpochLoss {
        total: sums.total / n,
        pred: sums.pred / n,
        gate: sums.gate / n,
    })
}

/// Mean losses over every (story, ending) instance of `stories`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DatasetLoss {
    pub total: f64,
    pub prediction: f64,
    pub gate: f64,
    pub regularizer: f64,
}

/// Evaluation-mode (no dropout) loss of `model` over `stories`.
pub fn dataset_loss(model: &Model, stories: &[Story], data: &TrainData<'_>, cfg: &TrainConfig) -> Result<DatasetLoss> {
    let prepared = prepare(stories, data);
    let mut out = DatasetLoss::default();
    let mut count = 0usize;
    for story in &prepared {
        for (ei, ending) in story.endings.iter().enumerate() {
            let instance = Instance {
                context: story.context.clone(),
                ending: ending.clone(),
            };
            let target = if (ei == 0) == (story.gold == Ending::A) { 1.0 } else { 0.0 };
            let mut tape = Tape::new();
            let (vars, graph) = model.forward(&mut tape, &instance, data.embeddings, None)?;
            let loss = compute_loss(&mut tape, model, &vars, &graph, target, story.labels, cfg)?;
            out.total += loss.total_value;
            out.prediction += loss.prediction;
            out.gate += loss.gate;
            out.regularizer += loss.regularizer;
            count += 1;
        }
    }
    if count > 0 {
        let n = count as f64;
        out.total /= n;
        out.prediction /= n;
        out.gate /= n;
        out.regularizer /= n;
    }
    Ok(out)
}

/// Trains `runs_per_seed` models for every seed, keeping the checkpoint with
/// the best validation accuracy. No run is cut short; selection alone plays
/// the role of early stopping.
///
/// Run `r` of seed `s` draws its initialisation, shuffles and dropout masks
/// from ChaCha8 stream `r` of seed `s`, so the whole session is reproducible.
pub fn train(data: &TrainData<'_>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.train.is_empty() {
        return Err(Error::Config("training corpus is empty".into()));
    }
    if data.validation.is_empty() {
        return Err(Error::Config("validation set is empty".into()));
    }
    if cfg.alpha > 0.0 && cfg.any_supervision() {
        let labels = data
            .labels
            .ok_or_else(|| Error::Config("gate supervision needs trigger labels".into()))?;
        check_alignment(data.train, labels)?;
    }
    let model_cfg = cfg.model_config(data.embeddings.dim());
    let train_set = prepare(data.train, data);
    let mut log = Vec::new();
    let mut per_seed: Vec<Snapshot> = Vec::new();
    let mut touched = Vec::new();
    let mut last = None;
    for &seed in &cfg.seeds {
        let mut seed_best: Option<Snapshot> = None;
        for run in 0..cfg.runs_per_seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64);
            let mut model = Model::with_rng(model_cfg.clone(), &mut rng)?;
            if touched.is_empty() {
                touched = vec![false; model.params.len()];
            }
            let mut state = FtrlState::new(cfg.ftrl(), model.params.tensors());
            let mut run_best: Option<Snapshot> = None;
            for epoch in 1..=cfg.epochs {
                let loss = run_epoch(&mut model, &mut state, &train_set, data, cfg, &mut rng, &mut touched)?;
                let val_acc = eval::evaluate(&model, data.validation, data.vocab, data.embeddings)?.accuracy;
                debug!(
                    "seed {seed} run {run} epoch {epoch}: loss {:.5} (pred {:.5}, gate {:.5}) val_acc {:.4}",
                    loss.total, loss.pred, loss.gate, val_acc
                );
                log.push(LogRow {
                    seed,
                    run,
                    epoch,
                    loss_total: loss.total,
                    loss_pred: loss.pred,
                    loss_gate: loss.gate,
                    val_acc,
                });
                if run_best.as_ref().is_none_or(|b| val_acc > b.val_acc) {
                    run_best = Some(Snapshot {
                        seed,
                        run,
                        epoch,
                        val_acc,
                        model: model.clone(),
                    });
                }
            }
            last = Some(Snapshot {
                seed,
                run,
                epoch: cfg.epochs,
                val_acc: log.last().map_or(0.0, |r: &LogRow| r.val_acc),
                model,
            });
            if let Some(rb) = run_best {
                info!("seed {seed} run {run}: best val_acc {:.4} at epoch {}", rb.val_acc, rb.epoch);
                if seed_best.as_ref().is_none_or(|b| rb.val_acc > b.val_acc) {
                    seed_best = Some(rb);
                }
            }
        }
        if let Some(sb) = seed_best {
            per_seed.push(sb);
        }
    }
    let best = per_seed
        .iter()
        .fold(None::<&Snapshot>, |acc, r| match acc {
            Some(b) if b.val_acc >= r.val_acc => Some(b),
            _ => Some(r),
        })
        .cloned()
        .ok_or_else(|| Error::Config("no epochs were run (epochs = 0)".into()))?;
    Ok(TrainOutcome {
        best,
        per_seed,
        last: last.expect("at least one run"),
        log,
        touched,
    })
}

/// Gradient check of the complete training loss on a small synthetic
/// instance: `hidden`-sized model and embeddings, `tokens` context tokens,
/// frozen dropout masks and gate supervision on.
pub fn full_loss_grad_check(hidden: usize, tokens: usize, seed: u64) -> Result<(Vec<String>, GradCheckReport)> {
    let (stories, lex) = crate::data::generate_synthetic(1, seed, &Default::default());
    let vocab = Vocabulary::from_stories(&stories);
    let table = crate::data::random_embeddings(&vocab, hidden, 1.0, seed);
    let story = &stories[0];
    let context: Vec<&str> = story.context_tokens().into_iter().take(tokens).collect();
    let labels = crate::labeler::label_story(&context, &crate::labeler::LexiconSet::from_synthetic(&lex));
    let instance = Instance {
        context: vocab.encode(&context),
        ending: vocab.encode(&story.ending_a),
    };
    let cfg = TrainConfig {
        hidden_size: hidden,
        ..Default::default()
    };
    let model = Model::new(cfg.model_config(hidden), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks = DropoutMasks::sample(&mut rng, hidden, hidden, cfg.dropout_rates());
    let report = grad_check(model.params.tensors(), DEFAULT_STEP, |tape, vars| {
        let graph = model.forward_with(tape, vars, &instance, &table, Some(&masks))?;
        Ok(compute_loss(tape, &model, vars, &graph, 1.0, Some(&labels), &cfg)?.total)
    })?;
    Ok((model.params.names().to_vec(), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = TrainConfig {
            seeds: vec![3, 9],
            alpha: 0.25,
            free_chain: false,
            ..Default::default()
        };
        assert_eq!(TrainConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_rates() {
        assert_eq!(TrainConfig::parse("gamma = 1").unwrap_err().category(), "config");
        assert!(TrainConfig::parse("dropout_chain = 1.0").is_err());
        assert!(TrainConfig::parse("alpha = -0.1").is_err());
        assert!(TrainConfig::parse("batch_size = 0").is_err());
    }

    fn ftrl(lr: f64) -> FtrlConfig {
        FtrlConfig {
            learning_rate: lr,
            beta: 1.0,
            l1: 0.0,
            l2: 0.0,
        }
    }

    #[test]
    fn zero_gradient_is_stationary() {
        let mut params = vec![Tensor::vector(vec![0.3, -0.7, 0.0])];
        let names = vec!["w".to_string()];
        let mut state = FtrlState::new(ftrl(0.1), &params);
        let before = (params.clone(), state.clone());
        ftrl_step(&mut params, &names, &[Tensor::zeros(&[3])], &mut state).unwrap();
        assert_eq!(params, before.0);
        assert_eq!(state, before.1);
    }

    #[test]
    fn two_step_hand_trace() {
        // n1 = 1, z1 = 1, w1 = -0.1 * 1 / (1 + 1) = -0.05
        // n2 = 2, z2 = 2 + 0.5 * (sqrt2 - 1), w2 = -0.1 * z2 / (1 + sqrt2)
        let mut params = vec![Tensor::scalar(0.0)];
        let names = vec!["w".to_string()];
        let mut state = FtrlState::new(ftrl(0.1), &params);
        let g = [Tensor::scalar(1.0)];
        ftrl_step(&mut params, &names, &g, &mut state).unwrap();
        assert!((params[0].item() + 0.05).abs() < 1e-15);
        assert_eq!(state.n[0].item(), 1.0);
        assert!((state.z[0].item() - 1.0).abs() < 1e-15);
        ftrl_step(&mut params, &names, &g, &mut state).unwrap();
        let s2 = 2f64.sqrt();
        let z2 = 2.0 + 0.5 * (s2 - 1.0);
        assert!((state.z[0].item() - z2).abs() < 1e-12);
        assert!((params[0].item() + 0.1 * z2 / (1.0 + s2)).abs() < 1e-12);
        assert!((params[0].item() + 0.0914213562373095).abs() < 1e-12);
    }

    #[test]
    fn l1_and_l2_shrink() {
        let cfg = FtrlConfig {
            learning_rate: 0.1,
            beta: 1.0,
            l1: 5.0,
            l2: 0.0,
        };
        let mut params = vec![Tensor::scalar(0.0)];
        let mut state = FtrlState::new(cfg, &params);
        ftrl_step(&mut params, &["w".into()], &[Tensor::scalar(1.0)], &mut state).unwrap();
        assert_eq!(params[0].item(), 0.0);
    }

    #[test]
    fn nan_gradient_aborts_and_names_param() {
        let mut params = vec![Tensor::scalar(1.0), Tensor::scalar(2.0)];
        let names = vec!["a".to_string(), "b".to_string()];
        let mut state = FtrlState::new(ftrl(0.1), &params);
        let err = ftrl_step(
            &mut params,
            &names,
            &[Tensor::scalar(1.0), Tensor::scalar(f64::NAN)],
            &mut state,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Numeric(ref p) if p == "b"));
        assert_eq!(params[0].item(), 1.0);
    }
}
