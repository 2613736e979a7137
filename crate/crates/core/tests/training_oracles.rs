mod common;

use common::{pattern, Fixture};
use memchain::checkpoint;
use memchain::labeler::{Aspect, TriggerLabels};
use memchain::model::{DropoutMasks, Instance, Model, ModelConfig};
use memchain::tape::Tape;
use memchain::training::{compute_loss, ftrl_step, train, FtrlConfig, FtrlState, TrainConfig, TrainData};
use memchain::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bce_oracle(p: f64, y: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

fn hand_set_model(h: usize) -> Model {
    let mut model = Model::zeros(ModelConfig::new(h, h, false, true)).unwrap();
    let mut phase = 0.0;
    for t in model.params.tensors_mut() {
        let n = t.len();
        t.data_mut().copy_from_slice(&pattern(n, phase, 0.4));
        phase += 0.77;
    }
    model
}

#[test]
fn loss_matches_hand_computation() {
    let fx = Fixture::new(1, 2, 3);
    let model = hand_set_model(3);
    assert_eq!(model.config.num_chains(), 3);
    let inst = Instance {
        context: vec![1, 2],
        ending: vec![3],
    };
    let labels = TriggerLabels {
        event: vec![true, false],
        sentiment: vec![false, false],
        topic: vec![true, true],
    };
    for (alpha, lambda, target, skip_sentiment) in [(0.5, 0.001, 1.0, false), (2.0, 0.1, 0.0, true), (0.0, 0.0, 1.0, false)] {
        let cfg = TrainConfig {
            alpha,
            lambda,
            supervise_sentiment: !skip_sentiment,
            ..Default::default()
        };
        let mut tape = Tape::new();
        let (vars, graph) = model.forward(&mut tape, &inst, &fx.embeddings, None).unwrap();
        let parts = compute_loss(&mut tape, &model, &vars, &graph, target, Some(&labels), &cfg).unwrap();

        let y_hat = tape.scalar(graph.y_hat);
        let mut gate_terms = Vec::new();
        for i in 0..2 {
            for (j, aspect) in Aspect::ALL.iter().enumerate() {
                if skip_sentiment && *aspect == Aspect::Sentiment {
                    continue;
                }
                let l = if labels.get(*aspect)[i] { 1.0 } else { 0.0 };
                gate_terms.push(bce_oracle(tape.scalar(graph.chains.gates[i][j]), l));
            }
        }
        let gate = gate_terms.iter().sum::<f64>() / gate_terms.len() as f64;
        let r = model.params.get("out.r").unwrap().data();
        let reg = lambda * r.iter().map(|v| v * v).sum::<f64>();
        let expected = bce_oracle(y_hat, target) + alpha * gate + reg;
        assert!((parts.total_value - expected).abs() < 1e-12, "{} vs {expected}", parts.total_value);
        assert!((parts.gate - gate).abs() < 1e-12);
        let recomposed = parts.prediction + alpha * parts.gate + parts.regularizer;
        assert!((parts.total_value - recomposed).abs() < 1e-9);
    }
}

#[test]
fn loss_decomposes_on_random_instances() {
    let fx = Fixture::new(12, 5, 6);
    let cfg = TrainConfig {
        alpha: 0.7,
        lambda: 0.05,
        hidden_size: 6,
        ..Default::default()
    };
    let model = Model::new(cfg.model_config(6), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for story in &fx.stories {
        let inst = Instance {
            context: fx.vocab.encode(&story.context_tokens()),
            ending: fx.vocab.encode(&story.ending_b),
        };
        let masks = DropoutMasks::sample(&mut rng, 6, 6, cfg.dropout_rates());
        let mut tape = Tape::new();
        let (vars, graph) = model.forward(&mut tape, &inst, &fx.embeddings, Some(&masks)).unwrap();
        let parts = compute_loss(&mut tape, &model, &vars, &graph, 0.0, fx.labels.get(&story.id), &cfg).unwrap();
        let recomposed = parts.prediction + cfg.alpha * parts.gate + parts.regularizer;
        assert!((parts.total_value - recomposed).abs() < 1e-9);
    }
}

#[test]
fn zero_alpha_leaves_prediction_gradient_alone() {
    let fx = Fixture::new(3, 9, 6);
    let cfg = TrainConfig {
        alpha: 0.0,
        lambda: 0.0,
        hidden_size: 6,
        ..Default::default()
    };
    let model = Model::new(cfg.model_config(6), 8).unwrap();
    let story = &fx.stories[1];
    let inst = Instance {
        context: fx.vocab.encode(&story.context_tokens()),
        ending: fx.vocab.encode(&story.ending_a),
    };
    let masks = DropoutMasks::sample(&mut ChaCha8Rng::seed_from_u64(4), 6, 6, cfg.dropout_rates());

    let mut tape = Tape::new();
    let (vars, graph) = model.forward(&mut tape, &inst, &fx.embeddings, Some(&masks)).unwrap();
    let parts = compute_loss(&mut tape, &model, &vars, &graph, 1.0, fx.labels.get(&story.id), &cfg).unwrap();
    assert!(parts.gate > 0.0, "gate loss is still reported");
    let with_cfg = tape.backward(parts.total).unwrap();

    let mut tape = Tape::new();
    let (_, graph) = model.forward(&mut tape, &inst, &fx.embeddings, Some(&masks)).unwrap();
    let pred = tape.bce(graph.y_hat, 1.0).unwrap();
    let plain = tape.backward(pred).unwrap();
    assert_eq!(with_cfg.grads, plain.grads);
}

#[test]
fn ftrl_without_regularisation_is_adaptive_gradient_descent() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for beta in [1.0, 0.01, 0.0] {
        let config = FtrlConfig {
            learning_rate: 0.3,
            beta,
            l1: 0.0,
            l2: 0.0,
        };
        let init: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut params = vec![Tensor::vector(init.clone())];
        let names = vec!["w".to_string()];
        let mut state = FtrlState::new(config, &params);
        let mut w = init;
        let mut n = [0.0; 5];
        for _ in 0..50 {
            let g: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            ftrl_step(&mut params, &names, &[Tensor::vector(g.clone())], &mut state).unwrap();
            for k in 0..5 {
                n[k] += g[k] * g[k];
                w[k] -= 0.3 * g[k] / (beta + n[k].sqrt());
            }
            for k in 0..5 {
                assert!((params[0].data()[k] - w[k]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn ftrl_accumulators_never_shrink() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut params = vec![Tensor::vector(vec![0.5, -0.2, 0.0])];
    let names = vec!["w".to_string()];
    let mut state = FtrlState::new(
        FtrlConfig {
            learning_rate: 0.1,
            beta: 1.0,
            l1: 0.01,
            l2: 0.1,
        },
        &params,
    );
    let mut prev = state.n[0].clone();
    for _ in 0..100 {
        let g: Vec<f64> = (0..3).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
        ftrl_step(&mut params, &names, &[Tensor::vector(g)], &mut state).unwrap();
        for (a, b) in state.n[0].data().iter().zip(prev.data()) {
            assert!(*a >= 0.0 && a >= b);
        }
        prev = state.n[0].clone();
    }
}

#[test]
fn ftrl_solves_a_convex_quadratic() {
    // f(w) = 0.5 w'Aw - b'w with A symmetric positive definite
    let a = [[3.0, 0.5, 0.2], [0.5, 2.0, -0.3], [0.2, -0.3, 1.5]];
    let b = [1.0, -2.0, 0.5];
    let grad = |w: &[f64]| -> Vec<f64> { (0..3).map(|r| (0..3).map(|c| a[r][c] * w[c]).sum::<f64>() - b[r]).collect() };
    let mut params = vec![Tensor::vector(vec![0.0; 3])];
    let names = vec!["w".to_string()];
    let mut state = FtrlState::new(
        FtrlConfig {
            learning_rate: 1.0,
            beta: 1.0,
            l1: 0.0,
            l2: 0.0,
        },
        &params,
    );
    let mut reached = None;
    for step in 1..=500 {
        let g = grad(params[0].data());
        ftrl_step(&mut params, &names, &[Tensor::vector(g)], &mut state).unwrap();
        let norm = grad(params[0].data()).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-3 {
            reached = Some(step);
            break;
        }
    }
    assert!(reached.is_some(), "gradient norm still >= 1e-3 after 500 steps");
}

fn small_run(fx: &Fixture, cfg: &TrainConfig) -> memchain::training::TrainOutcome {
    let (train_set, val_set) = fx.split(8);
    let data = TrainData {
        train: &train_set,
        validation: &val_set,
        labels: Some(&fx.labels),
        vocab: &fx.vocab,
        embeddings: &fx.embeddings,
    };
    train(&data, cfg).unwrap()
}

fn small_cfg() -> TrainConfig {
    TrainConfig {
        hidden_size: 6,
        epochs: 4,
        batch_size: 16,
        seeds: vec![3, 4],
        runs_per_seed: 2,
        ..Default::default()
    }
}

#[test]
fn selection_keeps_the_best_validation_epoch() {
    let fx = Fixture::new(40, 13, 6);
    let outcome = small_run(&fx, &small_cfg());
    assert_eq!(outcome.log.len(), 2 * 2 * 4);
    assert!(outcome.log.iter().all(|r| outcome.best.val_acc >= r.val_acc));
    for snap in &outcome.per_seed {
        assert!(outcome.log.iter().filter(|r| r.seed == snap.seed).all(|r| snap.val_acc >= r.val_acc));
        let logged = outcome
            .log
            .iter()
            .find(|r| r.seed == snap.seed && r.run == snap.run && r.epoch == snap.epoch)
            .unwrap();
        assert_eq!(logged.val_acc, snap.val_acc);
    }
}

#[test]
fn training_is_reproducible() {
    let fx = Fixture::new(24, 14, 6);
    let a = small_run(&fx, &small_cfg());
    let b = small_run(&fx, &small_cfg());
    assert_eq!(memchain::training::log_to_csv(&a.log), memchain::training::log_to_csv(&b.log));
    assert_eq!(checkpoint::to_string(&a.best.model), checkpoint::to_string(&b.best.model));
    assert_eq!(checkpoint::to_string(&a.last.model), checkpoint::to_string(&b.last.model));
}

#[test]
fn published_hyperparameters_survive_the_config_file() {
    let cfg = TrainConfig::default();
    assert_eq!((cfg.alpha, cfg.batch_size, cfg.learning_rate, cfg.epochs), (0.5, 128, 0.1, 200));
    assert_eq!(cfg.lambda, 0.001);
    assert_eq!(cfg.hidden_size, 300);
    assert_eq!(
        [cfg.dropout_embedding, cfg.dropout_chain, cfg.dropout_classifier],
        [0.5, 0.2, 0.2]
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.cfg");
    cfg.save(&path).unwrap();
    assert_eq!(TrainConfig::load(&path).unwrap(), cfg);
}
