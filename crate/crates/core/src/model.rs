//! Bi-directional recurrent entity network with keyed memory chains.
//!
//! Token embeddings pass through a BiGRU whose two directions are summed.
//! Each memory chain keeps a unit-norm memory per scan direction, updated
//! by a scalar gate (location term `h·k` plus content term `h·m`) and a
//! PReLU candidate, then renormalised. The final memories are read out with
//! attention keyed by the encoded ending and scored by a small classifier.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::EmbeddingTable;
use crate::error::{Error, Result};
use crate::labeler::Aspect;
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

pub const PRELU_INIT: f64 = 0.25;
pub const KEY_INIT_STD: f64 = 0.1;

/// What a memory chain is meant to track.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChainRole {
    Aspect(Aspect),
    Free,
}

impl ChainRole {
    pub fn name(self) -> &'static str {
        match self {
            ChainRole::Aspect(a) => a.name(),
            ChainRole::Free => "free",
        }
    }
}

impl fmt::Display for ChainRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChainRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "free" {
            Ok(ChainRole::Free)
        } else {
            s.parse().map(ChainRole::Aspect)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub hidden: usize,
    pub embed: usize,
    pub chains: Vec<ChainRole>,
    pub bidirectional: bool,
}

impl ModelConfig {
    /// Event, sentiment and topic chains plus an optional free chain.
    pub fn new(hidden: usize, embed: usize, free_chain: bool, bidirectional: bool) -> Self {
        let mut chains: Vec<ChainRole> = Aspect::ALL.iter().map(|a| ChainRole::Aspect(*a)).collect();
        if free_chain {
            chains.push(ChainRole::Free);
        }
        ModelConfig {
            hidden,
            embed,
            chains,
            bidirectional,
        }
    }

    pub fn num_chains(&self) -> usize {
        self.chains.len()
    }

    fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.embed == 0 {
            return Err(Error::Config("hidden and embedding sizes must be positive".into()));
        }
        if self.chains.is_empty() {
            return Err(Error::Config("at least one memory chain is required".into()));
        }
        Ok(())
    }
}

/// Trainable tensors in a fixed order with stable names.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index_of(name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index_of(name).map(move |i| &mut self.tensors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    fn push(&mut self, name: String, t: Tensor) -> usize {
        self.names.push(name);
        self.tensors.push(t);
        self.tensors.len() - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn slot(self) -> usize {
        match self {
            Direction::Forward => 0,
            Direction::Backward => 1,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct GruIds {
    w_z: usize,
    u_z: usize,
    b_z: usize,
    w_r: usize,
    u_r: usize,
    b_r: usize,
    w_n: usize,
    u_n: usize,
    b_n: usize,
}

#[derive(Clone, Debug, PartialEq)]
struct ChainIds {
    u: usize,
    v: usize,
    w: usize,
    slope: usize,
}

#[derive(Clone, Debug, PartialEq)]
struct Layout {
    gru: [GruIds; 2],
    chain: [ChainIds; 2],
    keys: Vec<usize>,
    att: usize,
    out_h: usize,
    out_r: usize,
    out_slope: usize,
}

/// Initialisation draws for a freshly built parameter set.
enum Init<'a> {
    Zeros,
    Random(&'a mut ChaCha8Rng),
}

fn build_params(config: &ModelConfig, mut init: Init<'_>) -> (Layout, ParamSet) {
    let (h, d) = (config.hidden, config.embed);
    let mut ps = ParamSet {
        names: Vec::new(),
        tensors: Vec::new(),
    };
    let bound = 1.0 / (h as f64).sqrt();
    let uniform = |shape: &[usize], init: &mut Init<'_>| -> Tensor {
        let mut t = Tensor::zeros(shape);
        if let Init::Random(rng) = init {
            for v in t.data_mut() {
                *v = rng.random_range(-bound..bound);
            }
        }
        t
    };
    let mut gru = Vec::new();
    for dir in [Direction::Forward, Direction::Backward] {
        let p = |n: &str| format!("gru.{}.{n}", dir.tag());
        gru.push(GruIds {
            w_z: ps.push(p("w_z"), uniform(&[h, d], &mut init)),
            u_z: ps.push(p("u_z"), uniform(&[h, h], &mut init)),
            b_z: ps.push(p("b_z"), Tensor::zeros(&[h])),
            w_r: ps.push(p("w_r"), uniform(&[h, d], &mut init)),
            u_r: ps.push(p("u_r"), uniform(&[h, h], &mut init)),
            b_r: ps.push(p("b_r"), Tensor::zeros(&[h])),
            w_n: ps.push(p("w_n"), uniform(&[h, d], &mut init)),
            u_n: ps.push(p("u_n"), uniform(&[h, h], &mut init)),
            b_n: ps.push(p("b_n"), Tensor::zeros(&[h])),
        });
    }
    let mut chain = Vec::new();
    for dir in [Direction::Forward, Direction::Backward] {
        let p = |n: &str| format!("chain.{}.{n}", dir.tag());
        chain.push(ChainIds {
            u: ps.push(p("u"), uniform(&[h, h], &mut init)),
            v: ps.push(p("v"), uniform(&[h, h], &mut init)),
            w: ps.push(p("w"), uniform(&[h, h], &mut init)),
            slope: ps.push(p("slope"), Tensor::filled(&[h], PRELU_INIT)),
        });
    }
    let mut keys = Vec::new();
    for role in &config.chains {
        let mut k = Tensor::zeros(&[h]);
        if let Init::Random(rng) = &mut init {
            let normal = Normal::new(0.0, KEY_INIT_STD).expect("finite std");
            for v in k.data_mut() {
                *v = normal.sample(*rng);
            }
        }
        keys.push(ps.push(format!("key.{role}"), k));
    }
    let att = ps.push("att.w".into(), uniform(&[h, h], &mut init));
    let out_h = ps.push("out.h".into(), uniform(&[h, h], &mut init));
    let out_r = ps.push("out.r".into(), uniform(&[h], &mut init));
    let out_slope = ps.push("out.slope".into(), Tensor::filled(&[h], PRELU_INIT));
    let gru: [GruIds; 2] = gru.try_into().expect("two directions");
    let chain: [ChainIds; 2] = chain.try_into().expect("two directions");
    (
        Layout {
            gru,
            chain,
            keys,
            att,
            out_h,
            out_r,
            out_slope,
        },
        ps,
    )
}

/// Locked dropout masks for one instance, already scaled by `1/(1-rate)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMasks {
    pub embedding: Tensor,
    pub chain_input: Tensor,
    pub classifier: Tensor,
}

impl DropoutMasks {
    pub fn sample<R: Rng>(rng: &mut R, embed: usize, hidden: usize, rates: [f64; 3]) -> Self {
        let mut draw = |n: usize, rate: f64| {
            let keep = 1.0 / (1.0 - rate);
            Tensor::vector(
                (0..n)
                    .map(|_| if rate > 0.0 && rng.random::<f64>() < rate { 0.0 } else { keep })
                    .collect(),
            )
        };
        DropoutMasks {
            embedding: draw(embed, rates[0]),
            chain_input: draw(hidden, rates[1]),
            classifier: draw(hidden, rates[2]),
        }
    }
}

/// One (context, ending) pair as vocabulary indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub context: Vec<usize>,
    pub ending: Vec<usize>,
}

/// Per-direction record of a chain scan, indexed by token position.
#[derive(Clone, Debug)]
pub struct DirectionTrace {
    /// `memories[i][j]`: chain `j` after absorbing token `i`.
    pub memories: Vec<Vec<Var>>,
    /// `gates[i][j]`: gate of chain `j` at token `i`.
    pub gates: Vec<Vec<Var>>,
}

#[derive(Clone, Debug)]
pub struct ChainTrace {
    pub forward: DirectionTrace,
    pub backward: Option<DirectionTrace>,
    /// Averaged gates `[i][j]` used for supervision.
    pub gates: Vec<Vec<Var>>,
    /// Fused final memory per chain.
    pub finals: Vec<Var>,
}

/// Tape handles for a full forward pass.
#[derive(Clone, Debug)]
pub struct ForwardGraph {
    pub y_hat: Var,
    pub states: Vec<Var>,
    pub chains: ChainTrace,
    pub ending: Var,
    pub attention: Var,
}

/// Plain values read back from a [`ForwardGraph`].
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardResult {
    pub y_hat: f64,
    /// `T x K` averaged gates.
    pub gates: Vec<Vec<f64>>,
    pub memories: Vec<Vec<f64>>,
    pub attention: Vec<f64>,
    pub ending: Vec<f64>,
}

impl ForwardResult {
    pub fn read(tape: &Tape, g: &ForwardGraph) -> Self {
        ForwardResult {
            y_hat: tape.scalar(g.y_hat),
            gates: g
                .chains
                .gates
                .iter()
                .map(|row| row.iter().map(|v| tape.scalar(*v)).collect())
                .collect(),
            memories: g.chains.finals.iter().map(|v| tape.value(*v).data().to_vec()).collect(),
            attention: tape.value(g.attention).data().to_vec(),
            ending: tape.value(g.ending).data().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    layout: Layout,
    pub params: ParamSet,
}

impl Model {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::with_rng(config, &mut rng)
    }

    pub fn with_rng(config: ModelConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let (layout, params) = build_params(&config, Init::Random(rng));
        Ok(Model { config, layout, params })
    }

    /// All-zero parameters with PReLU slopes at their initial value.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let (layout, params) = build_params(&config, Init::Zeros);
        Ok(Model { config, layout, params })
    }

    /// Rebuilds a model from named tensors, checking names and shapes.
    pub fn from_params(config: ModelConfig, params: ParamSet) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        if model.params.names != params.names {
            return Err(Error::Config("parameter names do not match the model layout".into()));
        }
        for ((name, want), got) in model.params.iter().zip(&params.tensors) {
            if want.shape() != got.shape() {
                return Err(Error::Config(format!(
                    "{name}: expected shape {:?}, found {:?}",
                    want.shape(),
                    got.shape()
                )));
            }
        }
        model.params = params;
        Ok(model)
    }

    pub fn hidden(&self) -> usize {
        self.config.hidden
    }

    /// Indices of every parameter owned by the backward direction.
    pub fn backward_param_indices(&self) -> Vec<usize> {
        let g = &self.layout.gru[1];
        let c = &self.layout.chain[1];
        vec![g.w_z, g.u_z, g.b_z, g.w_r, g.u_r, g.b_r, g.w_n, g.u_n, g.b_n, c.u, c.v, c.w, c.slope]
    }

    pub fn key_index(&self, chain: usize) -> usize {
        self.layout.keys[chain]
    }

    pub fn output_index(&self) -> usize {
        self.layout.out_r
    }

    /// Registers every parameter on `tape`, in [`ParamSet`] order.
    pub fn register(&self, tape: &mut Tape) -> Vec<Var> {
        self.params.tensors.iter().map(|t| tape.param(t.clone())).collect()
    }

    fn gru_step(&self, tape: &mut Tape, vars: &[Var], dir: Direction, x: Var, h: Var) -> Result<Var> {
        let g = &self.layout.gru[dir.slot()];
        let gate = |tape: &mut Tape, w: usize, u: usize, b: usize, hin: Var| -> Result<Var> {
            let wx = tape.matvec(vars[w], x)?;
            let uh = tape.matvec(vars[u], hin)?;
            let s = tape.add(wx, uh)?;
            tape.add(s, vars[b])
        };
        let zp = gate(tape, g.w_z, g.u_z, g.b_z, h)?;
        let z = tape.sigmoid(zp);
        let rp = gate(tape, g.w_r, g.u_r, g.b_r, h)?;
        let r = tape.sigmoid(rp);
        let rh = tape.hadamard(r, h)?;
        let np = gate(tape, g.w_n, g.u_n, g.b_n, rh)?;
        let n = tape.tanh(np);
        let diff = tape.sub(h, n)?;
        let zd = tape.hadamard(z, diff)?;
        tape.add(n, zd)
    }

    /// Hidden states of one GRU direction, returned in token order.
    fn gru_scan(&self, tape: &mut Tape, vars: &[Var], dir: Direction, xs: &[Var]) -> Result<Vec<Var>> {
        let mut h = tape.constant(Tensor::zeros(&[self.config.hidden]));
        let mut states = vec![h; xs.len()];
        let order: Box<dyn Iterator<Item = usize>> = match dir {
            Direction::Forward => Box::new(0..xs.len()),
            Direction::Backward => Box::new((0..xs.len()).rev()),
        };
        for i in order {
            h = self.gru_step(tape, vars, dir, xs[i], h)?;
            states[i] = h;
        }
        Ok(states)
    }

    fn check_sequence(&self, tape: &Tape, xs: &[Var]) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::Contract("token sequence must be non-empty".into()));
        }
        for x in xs {
            if tape.value(*x).shape() != [self.config.embed] {
                return Err(Error::Dimension {
                    op: "encode",
                    left: vec![self.config.embed],
                    right: tape.value(*x).shape().to_vec(),
                });
            }
        }
        Ok(())
    }

    /// Per-token BiGRU states `h_i = fwd_i + bwd_i`.
    pub fn encode_tokens(&self, tape: &mut Tape, vars: &[Var], xs: &[Var]) -> Result<Vec<Var>> {
        self.check_sequence(tape, xs)?;
        let fwd = self.gru_scan(tape, vars, Direction::Forward, xs)?;
        if !self.config.bidirectional {
            return Ok(fwd);
        }
        let bwd = self.gru_scan(tape, vars, Direction::Backward, xs)?;
        fwd.iter().zip(&bwd).map(|(f, b)| tape.add(*f, *b)).collect()
    }

    /// Ending vector: final forward state plus final backward state.
    pub fn encode_ending(&self, tape: &mut Tape, vars: &[Var], xs: &[Var]) -> Result<Var> {
        self.check_sequence(tape, xs)?;
        let fwd = self.gru_scan(tape, vars, Direction::Forward, xs)?;
        let last = *fwd.last().expect("non-empty");
        if !self.config.bidirectional {
            return Ok(last);
        }
        let bwd = self.gru_scan(tape, vars, Direction::Backward, xs)?;
        tape.add(last, bwd[0])
    }

    fn step_with_key_term(
        &self,
        tape: &mut Tape,
        vars: &[Var],
        dir: Direction,
        h: Var,
        key: Var,
        key_term: Var,
        memory: Var,
    ) -> Result<(Var, Var)> {
        let c = &self.layout.chain[dir.slot()];
        let um = tape.matvec(vars[c.u], memory)?;
        let wh = tape.matvec(vars[c.w], h)?;
        let s = tape.add(um, key_term)?;
        let s = tape.add(s, wh)?;
        let candidate = tape.prelu(s, vars[c.slope])?;
        let location = tape.dot(h, key)?;
        let content = tape.dot(h, memory)?;
        let logit = tape.add(location, content)?;
        let gate = tape.sigmoid(logit);
        let update = tape.scale(candidate, gate)?;
        let raw = tape.add(memory, update)?;
        Ok((tape.l2_normalize(raw), gate))
    }

    /// One gated update of a memory chain; returns the new unit-norm memory
    /// and the scalar gate.
    pub fn chain_step(
        &self,
        tape: &mut Tape,
        vars: &[Var],
        dir: Direction,
        h: Var,
        key: Var,
        memory: Var,
    ) -> Result<(Var, Var)> {
        let vk = tape.matvec(vars[self.layout.chain[dir.slot()].v], key)?;
        self.step_with_key_term(tape, vars, dir, h, key, vk, memory)
    }

    fn scan_chains(&self, tape: &mut Tape, vars: &[Var], dir: Direction, hs: &[Var]) -> Result<DirectionTrace> {
        let k = self.config.num_chains();
        let keys: Vec<Var> = self.layout.keys.iter().map(|&i| vars[i]).collect();
        let v = vars[self.layout.chain[dir.slot()].v];
        let mut key_terms = Vec::with_capacity(k);
        let mut memory = Vec::with_capacity(k);
        for &key in &keys {
            key_terms.push(tape.matvec(v, key)?);
            memory.push(tape.l2_normalize(key));
        }
        let t = hs.len();
        let mut trace = DirectionTrace {
            memories: vec![Vec::new(); t],
            gates: vec![Vec::new(); t],
        };
        let order: Vec<usize> = match dir {
            Direction::Forward => (0..t).collect(),
            Direction::Backward => (0..t).rev().collect(),
        };
        for i in order {
            let mut gates = Vec::with_capacity(k);
            for j in 0..k {
                let (m, g) = self.step_with_key_term(tape, vars, dir, hs[i], keys[j], key_terms[j], memory[j])?;
                memory[j] = m;
                gates.push(g);
            }
            trace.memories[i] = memory.clone();
            trace.gates[i] = gates;
        }
        Ok(trace)
    }

    /// Runs every chain over the context states in both directions.
    ///
    /// Backward gates are stored at the position of the token they absorbed,
    /// so `gates[i][j]` averages the two directions' decisions on token `i`.
    /// The fused final memory adds the last state of each scan.
    pub fn run_chains(&self, tape: &mut Tape, vars: &[Var], hs: &[Var]) -> Result<ChainTrace> {
        if hs.is_empty() {
            return Err(Error::Contract("context must be non-empty".into()));
        }
        let forward = self.scan_chains(tape, vars, Direction::Forward, hs)?;
        let last_fwd = forward.memories.last().expect("non-empty").clone();
        if !self.config.bidirectional {
            return Ok(ChainTrace {
                gates: forward.gates.clone(),
                finals: last_fwd,
                forward,
                backward: None,
            });
        }
        let backward = self.scan_chains(tape, vars, Direction::Backward, hs)?;
        let mut gates = Vec::with_capacity(hs.len());
        for (gf, gb) in forward.gates.iter().zip(&backward.gates) {
            let mut row = Vec::with_capacity(gf.len());
            for (a, b) in gf.iter().zip(gb) {
                let s = tape.add(*a, *b)?;
                row.push(tape.mul_const(s, 0.5));
            }
            gates.push(row);
        }
        let finals = last_fwd
            .iter()
            .zip(&backward.memories[0])
            .map(|(f, b)| tape.add(*f, *b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainTrace {
            forward,
            backward: Some(backward),
            gates,
            finals,
        })
    }

    /// Attention readout over the final memories and the output classifier.
    /// Returns `(y_hat, attention)`.
    pub fn score_ending(
        &self,
        tape: &mut Tape,
        vars: &[Var],
        memories: &[Var],
        ending: Var,
        classifier_mask: Option<&Tensor>,
    ) -> Result<(Var, Var)> {
        let l = &self.layout;
        let projected = tape.matvec(vars[l.att], ending)?;
        let logits = l
            .keys
            .iter()
            .map(|&k| tape.dot(vars[k], projected))
            .collect::<Result<Vec<_>>>()?;
        let logits = tape.stack(&logits)?;
        let attention = tape.softmax(logits)?;
        let mut readout = None;
        for (j, &m) in memories.iter().enumerate() {
            let p = tape.index(attention, j)?;
            let term = tape.scale(m, p)?;
            readout = Some(match readout {
                None => term,
                Some(acc) => tape.add(acc, term)?,
            });
        }
        let readout = readout.ok_or_else(|| Error::Contract("no memories to read".into()))?;
        let hu = tape.matvec(vars[l.out_h], readout)?;
        let pre = tape.add(hu, ending)?;
        let mut act = tape.prelu(pre, vars[l.out_slope])?;
        if let Some(mask) = classifier_mask {
            act = tape.mask(act, mask)?;
        }
        let logit = tape.dot(vars[l.out_r], act)?;
        Ok((tape.sigmoid(logit), attention))
    }

    fn embed(
        &self,
        tape: &mut Tape,
        ids: &[usize],
        table: &EmbeddingTable,
        mask: Option<&Tensor>,
    ) -> Result<Vec<Var>> {
        if table.dim() != self.config.embed {
            return Err(Error::Config(format!(
                "embedding dimension {} does not match model input size {}",
                table.dim(),
                self.config.embed
            )));
        }
        ids.iter()
            .map(|&id| {
                let x = tape.constant(Tensor::vector(table.row(id).to_vec()));
                match mask {
                    Some(m) => tape.mask(x, m),
                    None => Ok(x),
                }
            })
            .collect()
    }

    /// Full forward pass using already registered parameter vars.
    pub fn forward_with(
        &self,
        tape: &mut Tape,
        vars: &[Var],
        instance: &Instance,
        table: &EmbeddingTable,
        masks: Option<&DropoutMasks>,
    ) -> Result<ForwardGraph> {
        let ctx = self.embed(tape, &instance.context, table, masks.map(|m| &m.embedding))?;
        let end = self.embed(tape, &instance.ending, table, masks.map(|m| &m.embedding))?;
        let mut states = self.encode_tokens(tape, vars, &ctx)?;
        if let Some(m) = masks {
            states = states
                .into_iter()
                .map(|h| tape.mask(h, &m.chain_input))
                .collect::<Result<_>>()?;
        }
        let chains = self.run_chains(tape, vars, &states)?;
        let ending = self.encode_ending(tape, vars, &end)?;
        let (y_hat, attention) = self.score_ending(tape, vars, &chains.finals, ending, masks.map(|m| &m.classifier))?;
        Ok(ForwardGraph {
            y_hat,
            states,
            chains,
            ending,
            attention,
        })
    }

    /// Registers parameters and runs the forward pass.
    pub fn forward(
        &self,
        tape: &mut Tape,
        instance: &Instance,
        table: &EmbeddingTable,
        masks: Option<&DropoutMasks>,
    ) -> Result<(Vec<Var>, ForwardGraph)> {
        let vars = self.register(tape);
        let graph = self.forward_with(tape, &vars, instance, table, masks)?;
        Ok((vars, graph))
    }

    /// Evaluation-mode forward pass, returning plain values.
    pub fn evaluate_instance(&self, instance: &Instance, table: &EmbeddingTable) -> Result<ForwardResult> {
        let mut tape = Tape::new();
        let (_, graph) = self.forward(&mut tape, instance, table, None)?;
        Ok(ForwardResult::read(&tape, &graph))
    }
}
