//! Reverse-mode differentiation over a linear record of vector operations.
//!
//! A [`Tape`] is built fresh for every forward pass. Each op appends one
//! node holding its forward value; [`Tape::backward`] walks the nodes in
//! reverse, so every node is visited once and a node's gradient is complete
//! by the time it is reached. Gradients of shared subexpressions accumulate.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Sigmoid inputs are clamped to this magnitude so the output stays strictly
/// inside (0, 1) in `f64`.
pub const SIGMOID_CLAMP: f64 = 36.0;
/// Norm floor used by [`Tape::l2_normalize`].
pub const NORM_EPS: f64 = 1e-12;
/// Probability clamp used by [`Tape::bce`].
pub const BCE_EPS: f64 = 1e-12;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Constant,
    Param(usize),
    MatVec(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Hadamard(Var, Var),
    Scale(Var, Var),
    MulConst(Var, f64),
    Dot(Var, Var),
    Sum(Var),
    SqNorm(Var),
    Sigmoid(Var),
    Tanh(Var),
    Prelu(Var, Var),
    Softmax(Var),
    L2Normalize { x: Var, norm: f64, floored: bool },
    Mask(Var, Vec<f64>),
    Stack(Vec<Var>),
    Index(Var, usize),
    Bce(Var, f64),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: Vec<Var>,
}

/// Gradients for every parameter registered on a tape, in registration order.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub grads: Vec<Tensor>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.item()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    fn data(&self, v: Var) -> &[f64] {
        self.nodes[v.0].value.data()
    }

    fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn dim_err(&self, op: &'static str, a: Var, b: Var) -> Error {
        Error::Dimension {
            op,
            left: self.shape(a).to_vec(),
            right: self.shape(b).to_vec(),
        }
    }

    /// Input that receives no gradient.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Constant)
    }

    /// Differentiable leaf. Slots are numbered in registration order.
    pub fn param(&mut self, t: Tensor) -> Var {
        let slot = self.params.len();
        let v = self.push(t, Op::Param(slot));
        self.params.push(v);
        v
    }

    pub fn params(&self) -> &[Var] {
        &self.params
    }

    pub fn matvec(&mut self, m: Var, v: Var) -> Result<Var> {
        let (ms, vs) = (self.shape(m), self.shape(v));
        if ms.len() != 2 || vs.len() != 1 || ms[1] != vs[0] {
            return Err(self.dim_err("matvec", m, v));
        }
        let (rows, cols) = (ms[0], ms[1]);
        let md = self.data(m);
        let vd = self.data(v);
        let out: Vec<f64> = md
            .chunks_exact(cols)
            .map(|row| row.iter().zip(vd).map(|(a, b)| a * b).sum())
            .collect();
        debug_assert_eq!(out.len(), rows);
        Ok(self.push(Tensor::vector(out), Op::MatVec(m, v)))
    }

    fn zip_with(&mut self, a: Var, b: Var, name: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape(a) != self.shape(b) {
            return Err(self.dim_err(name, a, b));
        }
        let out = self.data(a).iter().zip(self.data(b)).map(|(x, y)| f(*x, *y)).collect();
        Tensor::new(self.shape(a).to_vec(), out)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip_with(a, b, "add", |x, y| x + y)?;
        Ok(self.push(t, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip_with(a, b, "sub", |x, y| x - y)?;
        Ok(self.push(t, Op::Sub(a, b)))
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip_with(a, b, "hadamard", |x, y| x * y)?;
        Ok(self.push(t, Op::Hadamard(a, b)))
    }

    /// Multiplies every element of `v` by the single-element node `s`.
    pub fn scale(&mut self, v: Var, s: Var) -> Result<Var> {
        if self.nodes[s.0].value.len() != 1 {
            return Err(self.dim_err("scale", v, s));
        }
        let k = self.scalar(s);
        let out = self.data(v).iter().map(|x| x * k).collect();
        let t = Tensor::new(self.shape(v).to_vec(), out)?;
        Ok(self.push(t, Op::Scale(v, s)))
    }

    pub fn mul_const(&mut self, v: Var, c: f64) -> Var {
        let out = self.data(v).iter().map(|x| x * c).collect();
        let t = Tensor::new(self.shape(v).to_vec(), out).expect("shape preserved");
        self.push(t, Op::MulConst(v, c))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(self.dim_err("dot", a, b));
        }
        let s = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x * y).sum();
        Ok(self.push(Tensor::scalar(s), Op::Dot(a, b)))
    }

    pub fn sum(&mut self, v: Var) -> Var {
        let s = self.data(v).iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(v))
    }

    pub fn sq_norm(&mut self, v: Var) -> Var {
        let s = self.data(v).iter().map(|x| x * x).sum();
        self.push(Tensor::scalar(s), Op::SqNorm(v))
    }

    pub fn sigmoid(&mut self, v: Var) -> Var {
        let out = self.data(v).iter().map(|&x| sigmoid(x)).collect();
        let t = Tensor::new(self.shape(v).to_vec(), out).expect("shape preserved");
        self.push(t, Op::Sigmoid(v))
    }

    pub fn tanh(&mut self, v: Var) -> Var {
        let out = self.data(v).iter().map(|x| x.tanh()).collect();
        let t = Tensor::new(self.shape(v).to_vec(), out).expect("shape preserved");
        self.push(t, Op::Tanh(v))
    }

    /// Parametric ReLU. `slope` has the shape of `x` (one slope per channel)
    /// or is a single element shared by all channels.
    pub fn prelu(&mut self, x: Var, slope: Var) -> Result<Var> {
        let n = self.nodes[slope.0].value.len();
        if self.shape(x) != self.shape(slope) && n != 1 {
            return Err(self.dim_err("prelu", x, slope));
        }
        let sd = self.data(slope);
        let out = self
            .data(x)
            .iter()
            .enumerate()
            .map(|(i, &v)| if v > 0.0 { v } else { sd[if n == 1 { 0 } else { i }] * v })
            .collect();
        let t = Tensor::new(self.shape(x).to_vec(), out)?;
        Ok(self.push(t, Op::Prelu(x, slope)))
    }

    pub fn softmax(&mut self, v: Var) -> Result<Var> {
        let d = self.data(v);
        if d.is_empty() {
            return Err(Error::Contract("softmax of empty vector".into()));
        }
        let max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = d.iter().map(|x| (x - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let out = exps.into_iter().map(|e| e / z).collect();
        let t = Tensor::new(self.shape(v).to_vec(), out)?;
        Ok(self.push(t, Op::Softmax(v)))
    }

    /// `x / max(‖x‖, NORM_EPS)`.
    pub fn l2_normalize(&mut self, x: Var) -> Var {
        let raw = self.nodes[x.0].value.norm();
        let floored = raw <= NORM_EPS;
        let norm = if floored { NORM_EPS } else { raw };
        let out = self.data(x).iter().map(|v| v / norm).collect();
        let t = Tensor::new(self.shape(x).to_vec(), out).expect("shape preserved");
        self.push(t, Op::L2Normalize { x, norm, floored })
    }

    /// Elementwise product with a fixed mask (dropout).
    pub fn mask(&mut self, x: Var, mask: &Tensor) -> Result<Var> {
        if self.shape(x) != mask.shape() {
            return Err(Error::Dimension {
                op: "mask",
                left: self.shape(x).to_vec(),
                right: mask.shape().to_vec(),
            });
        }
        let out = self.data(x).iter().zip(mask.data()).map(|(a, b)| a * b).collect();
        let t = Tensor::new(self.shape(x).to_vec(), out)?;
        Ok(self.push(t, Op::Mask(x, mask.data().to_vec())))
    }

    /// Collects single-element nodes into a vector.
    pub fn stack(&mut self, items: &[Var]) -> Result<Var> {
        let mut out = Vec::with_capacity(items.len());
        for &v in items {
            if self.nodes[v.0].value.len() != 1 {
                return Err(Error::Dimension {
                    op: "stack",
                    left: vec![1],
                    right: self.shape(v).to_vec(),
                });
            }
            out.push(self.scalar(v));
        }
        Ok(self.push(Tensor::vector(out), Op::Stack(items.to_vec())))
    }

    pub fn index(&mut self, v: Var, i: usize) -> Result<Var> {
        let d = self.data(v);
        if i >= d.len() {
            return Err(Error::Dimension {
                op: "index",
                left: self.shape(v).to_vec(),
                right: vec![i],
            });
        }
        let x = d[i];
        Ok(self.push(Tensor::scalar(x), Op::Index(v, i)))
    }

    /// Binary cross-entropy of probability node `p` against `target`, with
    /// the probability clamped to `[BCE_EPS, 1 - BCE_EPS]`.
    pub fn bce(&mut self, p: Var, target: f64) -> Result<Var> {
        if self.nodes[p.0].value.len() != 1 {
            return Err(Error::Contract("bce expects a scalar probability".into()));
        }
        Ok(self.push(Tensor::scalar(bce(self.scalar(p), target)), Op::Bce(p, target)))
    }

    /// Gradients of scalar node `loss` with respect to every registered param.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.nodes[loss.0].value.len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        let mut out: Vec<Tensor> = self
            .params
            .iter()
            .map(|&p| Tensor::zeros(self.shape(p)))
            .collect();

        for id in (0..=loss.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            match &node.op {
                Op::Constant => {}
                Op::Param(slot) => {
                    out[*slot].data_mut().copy_from_slice(&g);
                }
                Op::MatVec(m, v) => {
                    let md = self.data(*m);
                    let vd = self.data(*v);
                    let cols = vd.len();
                    self.accumulate(&mut grads, *m, |gm| {
                        for (i, gi) in g.iter().enumerate() {
                            if *gi != 0.0 {
                                for (x, vj) in gm[i * cols..(i + 1) * cols].iter_mut().zip(vd) {
                                    *x += gi * vj;
                                }
                            }
                        }
                    });
                    self.accumulate(&mut grads, *v, |gv| {
                        for (row, gi) in md.chunks_exact(cols).zip(&g) {
                            for (x, mij) in gv.iter_mut().zip(row) {
                                *x += mij * gi;
                            }
                        }
                    });
                }
                Op::Add(a, b) => {
                    self.accumulate(&mut grads, *a, |ga| add_into(ga, &g));
                    self.accumulate(&mut grads, *b, |gb| add_into(gb, &g));
                }
                Op::Sub(a, b) => {
                    self.accumulate(&mut grads, *a, |ga| add_into(ga, &g));
                    self.accumulate(&mut grads, *b, |gb| {
                        gb.iter_mut().zip(&g).for_each(|(x, y)| *x -= y)
                    });
                }
                Op::Hadamard(a, b) => {
                    let (ad, bd) = (self.data(*a), self.data(*b));
                    self.accumulate(&mut grads, *a, |ga| {
                        for ((x, gi), bi) in ga.iter_mut().zip(&g).zip(bd) {
                            *x += gi * bi;
                        }
                    });
                    self.accumulate(&mut grads, *b, |gb| {
                        for ((x, gi), ai) in gb.iter_mut().zip(&g).zip(ad) {
                            *x += gi * ai;
                        }
                    });
                }
                Op::Scale(v, s) => {
                    let k = self.scalar(*s);
                    let vd = self.data(*v);
                    self.accumulate(&mut grads, *v, |gv| {
                        gv.iter_mut().zip(&g).for_each(|(x, gi)| *x += gi * k)
                    });
                    let gs: f64 = g.iter().zip(vd).map(|(a, b)| a * b).sum();
                    self.accumulate(&mut grads, *s, |x| x[0] += gs);
                }
                Op::MulConst(v, c) => {
                    self.accumulate(&mut grads, *v, |gv| {
                        gv.iter_mut().zip(&g).for_each(|(x, gi)| *x += gi * c)
                    });
                }
                Op::Dot(a, b) => {
                    let (ad, bd) = (self.data(*a), self.data(*b));
                    let g0 = g[0];
                    self.accumulate(&mut grads, *a, |ga| {
                        ga.iter_mut().zip(bd).for_each(|(x, y)| *x += g0 * y)
                    });
                    self.accumulate(&mut grads, *b, |gb| {
                        gb.iter_mut().zip(ad).for_each(|(x, y)| *x += g0 * y)
                    });
                }
                Op::Sum(v) => {
                    let g0 = g[0];
                    self.accumulate(&mut grads, *v, |gv| gv.iter_mut().for_each(|x| *x += g0));
                }
                Op::SqNorm(v) => {
                    let g0 = g[0];
                    let vd = self.data(*v);
                    self.accumulate(&mut grads, *v, |gv| {
                        gv.iter_mut().zip(vd).for_each(|(x, y)| *x += 2.0 * g0 * y)
                    });
                }
                Op::Sigmoid(v) => {
                    let (xd, yd) = (self.data(*v), node.value.data());
                    self.accumulate(&mut grads, *v, |gv| {
                        for i in 0..gv.len() {
                            if xd[i].abs() < SIGMOID_CLAMP {
                                gv[i] += g[i] * yd[i] * (1.0 - yd[i]);
                            }
                        }
                    });
                }
                Op::Tanh(v) => {
                    let yd = node.value.data();
                    self.accumulate(&mut grads, *v, |gv| {
                        for i in 0..gv.len() {
                            gv[i] += g[i] * (1.0 - yd[i] * yd[i]);
                        }
                    });
                }
                Op::Prelu(x, slope) => {
                    let xd = self.data(*x);
                    let sd = self.data(*slope);
                    let shared = sd.len() == 1;
                    self.accumulate(&mut grads, *x, |gx| {
                        for i in 0..gx.len() {
                            let d = if xd[i] > 0.0 { 1.0 } else { sd[if shared { 0 } else { i }] };
                            gx[i] += g[i] * d;
                        }
                    });
                    self.accumulate(&mut grads, *slope, |gs| {
                        for i in 0..xd.len() {
                            if xd[i] <= 0.0 {
                                gs[if shared { 0 } else { i }] += g[i] * xd[i];
                            }
                        }
                    });
                }
                Op::Softmax(v) => {
                    let yd = node.value.data();
                    let gy: f64 = g.iter().zip(yd).map(|(a, b)| a * b).sum();
                    self.accumulate(&mut grads, *v, |gv| {
                        for i in 0..gv.len() {
                            gv[i] += yd[i] * (g[i] - gy);
                        }
                    });
                }
                Op::L2Normalize { x, norm, floored } => {
                    let yd = node.value.data();
                    let proj = if *floored {
                        0.0
                    } else {
                        g.iter().zip(yd).map(|(a, b)| a * b).sum()
                    };
                    self.accumulate(&mut grads, *x, |gx| {
                        for i in 0..gx.len() {
                            gx[i] += (g[i] - yd[i] * proj) / norm;
                        }
                    });
                }
                Op::Mask(x, mask) => {
                    self.accumulate(&mut grads, *x, |gx| {
                        for i in 0..gx.len() {
                            gx[i] += g[i] * mask[i];
                        }
                    });
                }
                Op::Stack(items) => {
                    for (i, &v) in items.iter().enumerate() {
                        let gi = g[i];
                        self.accumulate(&mut grads, v, |x| x[0] += gi);
                    }
                }
                Op::Index(v, i) => {
                    let g0 = g[0];
                    self.accumulate(&mut grads, *v, |gv| gv[*i] += g0);
                }
                Op::Bce(p, t) => {
                    let pv = self.scalar(*p);
                    let d = bce_grad(pv, *t) * g[0];
                    self.accumulate(&mut grads, *p, |x| x[0] += d);
                }
            }
        }
        Ok(Gradients { grads: out })
    }

    fn accumulate(&self, grads: &mut [Option<Vec<f64>>], v: Var, f: impl FnOnce(&mut [f64])) {
        if matches!(self.nodes[v.0].op, Op::Constant) {
            return;
        }
        let slot = grads[v.0].get_or_insert_with(|| vec![0.0; self.nodes[v.0].value.len()]);
        f(slot);
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    dst.iter_mut().zip(src).for_each(|(a, b)| *a += b);
}

pub fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn bce(p: f64, target: f64) -> f64 {
    let pc = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
    -(target * pc.ln() + (1.0 - target) * (1.0 - pc).ln())
}

fn bce_grad(p: f64, target: f64) -> f64 {
    if !(BCE_EPS..=1.0 - BCE_EPS).contains(&p) {
        return 0.0;
    }
    -target / p + (1.0 - target) / (1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_identity_and_zero() {
        let mut t = Tape::new();
        let i = t.constant(Tensor::identity(2));
        let v = t.constant(Tensor::vector(vec![3.0, 4.0]));
        let y = t.matvec(i, v).unwrap();
        assert_eq!(t.value(y).data(), &[3.0, 4.0]);
        let z = t.constant(Tensor::zeros(&[2, 2]));
        let ones = t.constant(Tensor::vector(vec![1.0, 1.0]));
        let y = t.matvec(z, ones).unwrap();
        assert_eq!(t.value(y).data(), &[0.0, 0.0]);
    }

    #[test]
    fn matvec_shape_error_names_both_shapes() {
        let mut t = Tape::new();
        let m = t.constant(Tensor::zeros(&[2, 3]));
        let v = t.constant(Tensor::zeros(&[2]));
        match t.matvec(m, v) {
            Err(Error::Dimension { left, right, .. }) => {
                assert_eq!(left, vec![2, 3]);
                assert_eq!(right, vec![2]);
            }
            other => panic!("expected dimension error, got {other:?}"),
        }
    }

    #[test]
    fn elementwise_examples() {
        let mut t = Tape::new();
        let a = t.constant(Tensor::vector(vec![1.0, 2.0]));
        let b = t.constant(Tensor::vector(vec![3.0, 4.0]));
        let h = t.hadamard(a, b).unwrap();
        assert_eq!(t.value(h).data(), &[3.0, 8.0]);
        let z = t.constant(Tensor::zeros(&[2]));
        let s = t.add(a, z).unwrap();
        assert_eq!(t.value(s).data(), t.value(a).data());
        let c = t.constant(Tensor::zeros(&[3]));
        assert!(t.add(a, c).is_err());
    }

    #[test]
    fn sigmoid_symmetry_and_saturation() {
        assert_eq!(sigmoid(0.0), 0.5);
        let lo = sigmoid(-1e6);
        assert!(lo > 0.0 && lo < 1e-15);
        let hi = sigmoid(1e6);
        assert!(hi < 1.0 && hi > 1.0 - 1e-15);
    }

    #[test]
    fn prelu_examples() {
        let mut t = Tape::new();
        let x = t.constant(Tensor::vector(vec![1.0, -2.0]));
        let s = t.constant(Tensor::scalar(0.25));
        let y = t.prelu(x, s).unwrap();
        assert_eq!(t.value(y).data(), &[1.0, -0.5]);
        let one = t.constant(Tensor::vector(vec![1.0, 1.0]));
        let y = t.prelu(x, one).unwrap();
        assert_eq!(t.value(y).data(), t.value(x).data());
    }

    #[test]
    fn softmax_uniform_and_stable() {
        let mut t = Tape::new();
        let x = t.constant(Tensor::filled(&[4], 7.3));
        let p = t.softmax(x).unwrap();
        for v in t.value(p).data() {
            assert!((v - 0.25).abs() < 1e-15);
        }
        let x = t.constant(Tensor::vector(vec![1000.0, 0.0]));
        let p = t.softmax(x).unwrap();
        let d = t.value(p).data();
        assert!(d.iter().all(|v| v.is_finite()));
        assert!((d[0] - 1.0).abs() < 1e-12 && d[1] >= 0.0 && d[1] < 1e-300);
    }

    #[test]
    fn l2_normalize_examples() {
        let mut t = Tape::new();
        let x = t.constant(Tensor::vector(vec![3.0, 4.0]));
        let y = t.l2_normalize(x);
        let d = t.value(y).data();
        assert!((d[0] - 0.6).abs() < 1e-15 && (d[1] - 0.8).abs() < 1e-15);
        let y2 = t.l2_normalize(y);
        assert_eq!(t.value(y2).data(), t.value(y).data());
        let z = t.constant(Tensor::zeros(&[3]));
        let y = t.l2_normalize(z);
        assert!(t.value(y).is_finite());
    }

    #[test]
    fn sum_gradient_is_ones() {
        let mut t = Tape::new();
        let x = t.param(Tensor::new(vec![2, 3], vec![1.0, -2.0, 3.0, 0.5, 0.0, 9.0]).unwrap());
        let s = t.sum(x);
        let g = t.backward(s).unwrap();
        assert_eq!(g.grads[0], Tensor::filled(&[2, 3], 1.0));
    }

    #[test]
    fn unreached_param_gets_zero() {
        let mut t = Tape::new();
        let x = t.param(Tensor::vector(vec![1.0, 2.0]));
        let _p = t.param(Tensor::vector(vec![5.0, 6.0, 7.0]));
        let s = t.sq_norm(x);
        let g = t.backward(s).unwrap();
        assert_eq!(g.grads[1], Tensor::zeros(&[3]));
    }

    #[test]
    fn shared_subexpression_accumulates() {
        let mut t = Tape::new();
        let x = t.param(Tensor::scalar(3.0));
        let y = t.add(x, x).unwrap();
        let g = t.backward(y).unwrap();
        assert_eq!(g.grads[0].item(), 2.0);
    }

    #[test]
    fn non_scalar_loss_is_contract_error() {
        let mut t = Tape::new();
        let x = t.param(Tensor::vector(vec![1.0, 2.0]));
        assert_eq!(t.backward(x).unwrap_err().category(), "contract");
    }

    #[test]
    fn bce_clamps() {
        assert!(bce(0.0, 1.0).is_finite());
        assert!(bce(1.0, 1.0) < 1e-11);
        assert!((bce(0.5, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
