mod common;

use common::{hand_set_chain_model, oracle, pattern, Fixture};
use memchain::model::{DropoutMasks, Instance, Model, ModelConfig};
use memchain::tape::Tape;
use memchain::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn run_chains_matches_scalar_oracle() {
    let (h, t) = (4, 3);
    let model = hand_set_chain_model(h);
    let hs: Vec<Vec<f64>> = (0..t).map(|i| pattern(h, 0.7 * i as f64 - 1.0, 1.2)).collect();

    let mut tape = Tape::new();
    let vars = model.register(&mut tape);
    let hv: Vec<_> = hs.iter().map(|x| tape.constant(Tensor::vector(x.clone()))).collect();
    let trace = model.run_chains(&mut tape, &vars, &hv).unwrap();

    let keys: Vec<Vec<f64>> = ["event", "free"]
        .iter()
        .map(|r| model.params.get(&format!("key.{r}")).unwrap().data().to_vec())
        .collect();
    let params = |dir: &str| oracle::ChainParams {
        u: model.params.get(&format!("chain.{dir}.u")).unwrap().data(),
        v: model.params.get(&format!("chain.{dir}.v")).unwrap().data(),
        w: model.params.get(&format!("chain.{dir}.w")).unwrap().data(),
        slope: model.params.get(&format!("chain.{dir}.slope")).unwrap().data(),
    };
    let (fm, fg) = oracle::scan(&params("fwd"), &keys, &hs, false);
    let (bm, bg) = oracle::scan(&params("bwd"), &keys, &hs, true);
    let bwd = trace.backward.as_ref().unwrap();

    for i in 0..t {
        for j in 0..2 {
            assert!(close(tape.scalar(trace.forward.gates[i][j]), fg[i][j], 1e-12));
            assert!(close(tape.scalar(bwd.gates[i][j]), bg[i][j], 1e-12));
            let avg = 0.5 * (fg[i][j] + bg[i][j]);
            assert!(close(tape.scalar(trace.gates[i][j]), avg, 1e-12));
            for r in 0..h {
                assert!(close(tape.value(trace.forward.memories[i][j]).data()[r], fm[i][j][r], 1e-12));
                assert!(close(tape.value(bwd.memories[i][j]).data()[r], bm[i][j][r], 1e-12));
            }
        }
    }
    for j in 0..2 {
        for r in 0..h {
            let fused = fm[t - 1][j][r] + bm[0][j][r];
            assert!(close(tape.value(trace.finals[j]).data()[r], fused, 1e-12));
        }
    }
    // make sure the hand-set values really reach the negative PReLU branch
    let p = params("fwd");
    let m0 = oracle::normalize(&keys[0]);
    let s: Vec<f64> = oracle::matvec(p.u, &m0)
        .iter()
        .zip(oracle::matvec(p.v, &keys[0]))
        .zip(oracle::matvec(p.w, &hs[0]))
        .map(|((a, b), c)| a + b + c)
        .collect();
    assert!(s.iter().any(|v| *v < 0.0));
}

#[test]
fn palindrome_with_mirrored_parameters_gives_symmetric_gates() {
    let h = 5;
    let mut model = hand_set_chain_model(h);
    for m in ["u", "v", "w", "slope"] {
        let fwd = model.params.get(&format!("chain.fwd.{m}")).unwrap().clone();
        *model.params.get_mut(&format!("chain.bwd.{m}")).unwrap() = fwd;
    }
    let base: Vec<Vec<f64>> = (0..3).map(|i| pattern(h, i as f64 * 1.3, 0.9)).collect();
    let hs = vec![base[0].clone(), base[1].clone(), base[2].clone(), base[1].clone(), base[0].clone()];
    let mut tape = Tape::new();
    let vars = model.register(&mut tape);
    let hv: Vec<_> = hs.iter().map(|x| tape.constant(Tensor::vector(x.clone()))).collect();
    let trace = model.run_chains(&mut tape, &vars, &hv).unwrap();
    let t = hs.len();
    for i in 0..t {
        for j in 0..2 {
            let a = tape.scalar(trace.gates[i][j]);
            let b = tape.scalar(trace.gates[t - 1 - i][j]);
            assert!(close(a, b, 1e-12), "gate {i},{j}: {a} vs {b}");
        }
    }
}

#[test]
fn larger_gate_forgets_more() {
    let h = 8;
    let m = oracle::normalize(&pattern(h, 0.2, 1.0));
    // candidate with a fixed component orthogonal to m plus a small aligned part
    let raw = pattern(h, 2.9, 1.0);
    let along = oracle::dot(&raw, &m);
    let cand: Vec<f64> = raw.iter().zip(&m).map(|(c, mi)| c - along * mi + 0.1 * mi).collect();
    let mut last = 1.0;
    for step in 1..100 {
        let g = step as f64 / 100.0;
        let mut tape = Tape::new();
        let mv = tape.constant(Tensor::vector(m.clone()));
        let cv = tape.constant(Tensor::vector(cand.clone()));
        let gv = tape.constant(Tensor::scalar(g));
        let upd = tape.scale(cv, gv).unwrap();
        let sum = tape.add(mv, upd).unwrap();
        let next = tape.l2_normalize(sum);
        let cos = oracle::dot(tape.value(next).data(), &m);
        assert!((tape.value(next).norm() - 1.0).abs() < 1e-12);
        assert!(cos < last, "cosine did not drop at g = {g}");
        last = cos;
    }
}

#[test]
fn zeroed_backward_direction_leaves_forward_values() {
    let fx = Fixture::new(4, 21, 6);
    let config = ModelConfig::new(6, 6, true, true);
    let mut model = Model::new(config.clone(), 4).unwrap();
    for i in model.backward_param_indices() {
        let shape = model.params.tensors()[i].shape().to_vec();
        model.params.tensors_mut()[i] = Tensor::zeros(&shape);
    }
    let uni = Model::from_params(ModelConfig { bidirectional: false, ..config }, model.params.clone()).unwrap();
    let story = &fx.stories[0];
    let inst = Instance {
        context: fx.vocab.encode(&story.context_tokens()),
        ending: fx.vocab.encode(&story.ending_a),
    };
    let bi = model.evaluate_instance(&inst, &fx.embeddings).unwrap();
    let fwd = uni.evaluate_instance(&inst, &fx.embeddings).unwrap();
    assert_eq!(bi.ending, fwd.ending);
    for (j, role) in model.config.chains.iter().enumerate() {
        let key = model.params.get(&format!("key.{role}")).unwrap().data();
        let unit = oracle::normalize(key);
        for r in 0..6 {
            // the backward chain never moves off its normalised key
            assert!(close(bi.memories[j][r], fwd.memories[j][r] + unit[r], 1e-12));
        }
    }
}

#[test]
fn gru_weights_are_shared_by_context_and_ending() {
    let fx = Fixture::new(2, 8, 6);
    let model = Model::new(ModelConfig::new(6, 6, true, true), 12).unwrap();
    let story = &fx.stories[0];
    let ctx: Vec<usize> = fx.vocab.encode(&story.context_tokens());
    let end: Vec<usize> = fx.vocab.encode(&story.ending_b);
    let run = |m: &Model| {
        let mut tape = Tape::new();
        let vars = m.register(&mut tape);
        let xs: Vec<_> = ctx.iter().map(|&i| tape.constant(Tensor::vector(fx.embeddings.row(i).to_vec()))).collect();
        let es: Vec<_> = end.iter().map(|&i| tape.constant(Tensor::vector(fx.embeddings.row(i).to_vec()))).collect();
        let h = m.encode_tokens(&mut tape, &vars, &xs).unwrap();
        let o = m.encode_ending(&mut tape, &vars, &es).unwrap();
        (tape.value(h[2]).clone(), tape.value(o).clone())
    };
    let (h0, o0) = run(&model);
    for name in ["gru.fwd.w_n", "gru.bwd.u_z"] {
        let mut bumped = model.clone();
        bumped.params.get_mut(name).unwrap().data_mut()[1] += 1e-3;
        let (h1, o1) = run(&bumped);
        assert_ne!(h0, h1, "{name} did not reach the context states");
        assert_ne!(o0, o1, "{name} did not reach the ending vector");
    }
}

#[test]
fn random_forward_passes_respect_invariants() {
    let fx = Fixture::new(20, 30, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for pass in 0..40 {
        let model = Model::new(ModelConfig::new(8, 8, true, pass % 3 != 0), pass as u64).unwrap();
        let story = &fx.stories[pass % fx.stories.len()];
        let inst = Instance {
            context: fx.vocab.encode(&story.context_tokens()),
            ending: fx.vocab.encode(&story.ending_a),
        };
        let masks = (pass % 2 == 0).then(|| DropoutMasks::sample(&mut rng, 8, 8, [0.5, 0.2, 0.2]));
        let mut tape = Tape::new();
        let (_, graph) = model.forward(&mut tape, &inst, &fx.embeddings, masks.as_ref()).unwrap();
        let mut traces = vec![&graph.chains.forward];
        traces.extend(graph.chains.backward.as_ref());
        for tr in traces {
            for (row_m, row_g) in tr.memories.iter().zip(&tr.gates) {
                for (&m, &g) in row_m.iter().zip(row_g) {
                    assert!((tape.value(m).norm() - 1.0).abs() < 1e-9);
                    let g = tape.scalar(g);
                    assert!(g > 0.0 && g < 1.0);
                }
            }
        }
        let att = tape.value(graph.attention);
        assert!((att.data().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let y = tape.scalar(graph.y_hat);
        assert!(y > 0.0 && y < 1.0);
        assert!(tape.value(graph.ending).is_finite());
        assert_eq!(graph.chains.gates.len(), inst.context.len());
        assert!(graph.chains.gates.iter().all(|r| r.len() == 4));
    }
}
