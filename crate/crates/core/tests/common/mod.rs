//! Shared fixtures for the integration tests and the acceptance runner.
#![allow(dead_code)]

use memchain::data::{generate_synthetic, random_embeddings, split_validation, EmbeddingTable, Story, SyntheticSpec, Vocabulary};
use memchain::labeler::{label_corpus, Aspect, LabelMap, LexiconSet};
use memchain::model::{ChainRole, Model, ModelConfig};
use memchain::Tensor;

/// A synthetic corpus with labels, vocabulary and random embeddings.
pub struct Fixture {
    pub stories: Vec<Story>,
    pub labels: LabelMap,
    pub vocab: Vocabulary,
    pub embeddings: EmbeddingTable,
}

impl Fixture {
    pub fn new(n: usize, seed: u64, dim: usize) -> Self {
        let (stories, lex) = generate_synthetic(n, seed, &SyntheticSpec::default());
        let labels = label_corpus(&stories, &LexiconSet::from_synthetic(&lex));
        let vocab = Vocabulary::from_stories(&stories);
        let embeddings = random_embeddings(&vocab, dim, 1.0, seed);
        Fixture {
            stories,
            labels,
            vocab,
            embeddings,
        }
    }

    pub fn split(&self, validation: usize) -> (Vec<Story>, Vec<Story>) {
        split_validation(&self.stories, validation)
    }
}

/// Deterministic, sign-varying fill so hand-set parameters exercise both
/// PReLU branches.
pub fn pattern(len: usize, phase: f64, scale: f64) -> Vec<f64> {
    (0..len).map(|i| scale * ((i as f64) * 1.7 + phase).sin()).collect()
}

/// Two-chain model (event + free) of width `h` with every chain parameter and
/// key hand-set from `pattern`.
pub fn hand_set_chain_model(h: usize) -> Model {
    let cfg = ModelConfig {
        hidden: h,
        embed: h,
        chains: vec![ChainRole::Aspect(Aspect::Event), ChainRole::Free],
        bidirectional: true,
    };
    let mut model = Model::zeros(cfg).unwrap();
    let mut phase = 0.3;
    for dir in ["fwd", "bwd"] {
        for (m, scale) in [("u", 0.6), ("v", 0.5), ("w", 0.7)] {
            let t = model.params.get_mut(&format!("chain.{dir}.{m}")).unwrap();
            *t = Tensor::matrix(h, h, pattern(h * h, phase, scale)).unwrap();
            phase += 1.1;
        }
        let s = model.params.get_mut(&format!("chain.{dir}.slope")).unwrap();
        *s = Tensor::vector(pattern(h, phase, 0.3));
        phase += 0.9;
    }
    for role in ["event", "free"] {
        let k = model.params.get_mut(&format!("key.{role}")).unwrap();
        *k = Tensor::vector(pattern(h, phase, 0.8));
        phase += 2.3;
    }
    model
}

/// Scalar re-implementation of the chain recurrences.
pub mod oracle {
    pub fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    pub fn matvec(m: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..m.len() / n)
            .map(|r| {
                let mut s = 0.0;
                for c in 0..n {
                    s += m[r * n + c] * x[c];
                }
                s
            })
            .collect()
    }

    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            s += a[i] * b[i];
        }
        s
    }

    pub fn normalize(x: &[f64]) -> Vec<f64> {
        let n = dot(x, x).sqrt().max(1e-12);
        x.iter().map(|v| v / n).collect()
    }

    pub struct ChainParams<'a> {
        pub u: &'a [f64],
        pub v: &'a [f64],
        pub w: &'a [f64],
        pub slope: &'a [f64],
    }

    /// One direction: returns `(memories[i][j], gates[i][j])` indexed by token
    /// position, whichever order the scan ran in.
    pub fn scan(p: &ChainParams, keys: &[Vec<f64>], hs: &[Vec<f64>], reverse: bool) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<f64>>) {
        let t = hs.len();
        let mut mem: Vec<Vec<f64>> = keys.iter().map(|k| normalize(k)).collect();
        let mut memories = vec![Vec::new(); t];
        let mut gates = vec![Vec::new(); t];
        let order: Vec<usize> = if reverse { (0..t).rev().collect() } else { (0..t).collect() };
        for i in order {
            let h = &hs[i];
            let mut g_row = Vec::new();
            for (j, k) in keys.iter().enumerate() {
                let um = matvec(p.u, &mem[j]);
                let vk = matvec(p.v, k);
                let wh = matvec(p.w, h);
                let mut raw = Vec::new();
                let g = sigmoid(dot(h, k) + dot(h, &mem[j]));
                for r in 0..h.len() {
                    let s = um[r] + vk[r] + wh[r];
                    let c = if s > 0.0 { s } else { p.slope[r] * s };
                    raw.push(mem[j][r] + g * c);
                }
                mem[j] = normalize(&raw);
                g_row.push(g);
            }
            memories[i] = mem.clone();
            gates[i] = g_row;
        }
        (memories, gates)
    }
}
