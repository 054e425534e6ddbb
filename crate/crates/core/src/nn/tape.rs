//! Reverse-mode autodiff on a Wengert tape.
//!
//! The tape is define-by-run: every op appends a node holding its inputs and
//! the computed value. `backward` walks the list in reverse and accumulates
//! gradients for nodes that were registered as parameters. Replaying the same
//! sequence of ops on the same values is bit-exact, which the training loop
//! relies on for deterministic re-scoring.

use crate::nn::params::{ParamId, ParamSet};
use crate::nn::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueId(usize);

#[derive(Debug, Clone)]
enum Op {
    /// Leaf with no gradient.
    Const,
    /// Leaf tracked as parameter `ParamId`.
    Param(#[allow(dead_code)] ParamId),
    Add(ValueId, ValueId),
    Sub(ValueId, ValueId),
    /// Elementwise product.
    Mul(ValueId, ValueId),
    /// x * c for a plain constant c.
    Scale(ValueId, f64),
    /// Matrix [m,n] times vector [n].
    MatVec(ValueId, ValueId),
    Tanh(ValueId),
    Sigmoid(ValueId),
    Relu(ValueId),
    Exp(ValueId),
    Concat(Vec<ValueId>),
    Slice(ValueId, usize, usize),
    /// Sum of all entries -> scalar.
    Sum(ValueId),
    Dot(ValueId, ValueId),
    /// Vector scaled by a scalar node.
    ScaleByNode(ValueId, ValueId),
    LogSoftmax(ValueId),
    /// Entropy of softmax(logits) -> scalar.
    EntropyFromLogits(ValueId),
    /// Single entry pick -> scalar.
    Gather(ValueId, usize),
}

struct Node {
    op: Op,
    value: Tensor,
}

pub struct Tape {
    nodes: Vec<Node>,
    n_params: usize,
    /// (param, node) pairs in registration order.
    param_nodes: Vec<(ParamId, ValueId)>,
}

impl Tape {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), n_params: 0, param_nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Tensor) -> ValueId {
        self.nodes.push(Node { op, value });
        ValueId(self.nodes.len() - 1)
    }

    pub fn value(&self, id: ValueId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: ValueId) -> f64 {
        self.nodes[id.0].value.item()
    }

    // ── Leaves ──────────────────────────────────────────────────────────

    pub fn constant(&mut self, t: Tensor) -> ValueId {
        self.push(Op::Const, t)
    }

    pub fn constant_vec(&mut self, v: Vec<f64>) -> ValueId {
        self.constant(Tensor::vector(v))
    }

    pub fn constant_scalar(&mut self, v: f64) -> ValueId {
        self.constant(Tensor::scalar(v))
    }

    /// Register a parameter leaf with its current value.
    pub fn param(&mut self, ps: &ParamSet, id: ParamId) -> ValueId {
        self.n_params = self.n_params.max(ps.len());
        let vid = self.push(Op::Param(id), ps.get(id).clone());
        self.param_nodes.push((id, vid));
        vid
    }

    // ── Elementwise and linear ops ──────────────────────────────────────

    fn check_same_shape(&self, a: ValueId, b: ValueId, what: &str) -> Result<()> {
        let (sa, sb) = (&self.value(a).shape, &self.value(b).shape);
        if sa != sb {
            return Err(Error::Dimension(format!("{what}: {sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    pub fn add(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        self.check_same_shape(a, b, "add")?;
        let data = self
            .value(a)
            .data
            .iter()
            .zip(self.value(b).data.iter())
            .map(|(x, y)| x + y)
            .collect();
        let shape = self.value(a).shape.clone();
        Ok(self.push(Op::Add(a, b), Tensor { shape, data }))
    }

    pub fn sub(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        self.check_same_shape(a, b, "sub")?;
        let data = self
            .value(a)
            .data
            .iter()
            .zip(self.value(b).data.iter())
            .map(|(x, y)| x - y)
            .collect();
        let shape = self.value(a).shape.clone();
        Ok(self.push(Op::Sub(a, b), Tensor { shape, data }))
    }

    pub fn mul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        self.check_same_shape(a, b, "mul")?;
        let data = self
            .value(a)
            .data
            .iter()
            .zip(self.value(b).data.iter())
            .map(|(x, y)| x * y)
            .collect();
        let shape = self.value(a).shape.clone();
        Ok(self.push(Op::Mul(a, b), Tensor { shape, data }))
    }

    pub fn scale(&mut self, x: ValueId, c: f64) -> ValueId {
        let data = self.value(x).data.iter().map(|v| v * c).collect();
        let shape = self.value(x).shape.clone();
        self.push(Op::Scale(x, c), Tensor { shape, data })
    }

    pub fn matvec(&mut self, w: ValueId, x: ValueId) -> Result<ValueId> {
        let (wt, xt) = (self.value(w), self.value(x));
        if wt.shape.len() != 2 || xt.shape.len() != 1 || wt.shape[1] != xt.shape[0] {
            return Err(Error::Dimension(format!(
                "matvec: {:?} x {:?}",
                wt.shape, xt.shape
            )));
        }
        let (m, n) = (wt.shape[0], wt.shape[1]);
        let mut out = vec![0.0; m];
        for i in 0..m {
            let row = &wt.data[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * xt.data[j];
            }
            out[i] = acc;
        }
        Ok(self.push(Op::MatVec(w, x), Tensor::vector(out)))
    }

    pub fn tanh(&mut self, x: ValueId) -> ValueId {
        let data = self.value(x).data.iter().map(|v| v.tanh()).collect();
        let shape = self.value(x).shape.clone();
        self.push(Op::Tanh(x), Tensor { shape, data })
    }

    pub fn sigmoid(&mut self, x: ValueId) -> ValueId {
        let data = self
            .value(x)
            .data
            .iter()
            .map(|v| 1.0 / (1.0 + (-v).exp()))
            .collect();
        let shape = self.value(x).shape.clone();
        self.push(Op::Sigmoid(x), Tensor { shape, data })
    }

    pub fn relu(&mut self, x: ValueId) -> ValueId {
        let data = self.value(x).data.iter().map(|v| v.max(0.0)).collect();
        let shape = self.value(x).shape.clone();
        self.push(Op::Relu(x), Tensor { shape, data })
    }

    pub fn exp(&mut self, x: ValueId) -> ValueId {
        let data = self.value(x).data.iter().map(|v| v.exp()).collect();
        let shape = self.value(x).shape.clone();
        self.push(Op::Exp(x), Tensor { shape, data })
    }

    pub fn concat(&mut self, parts: &[ValueId]) -> Result<ValueId> {
        if parts.is_empty() {
            return Err(Error::Dimension("concat of zero vectors".into()));
        }
        let mut data = Vec::new();
        for p in parts {
            data.extend_from_slice(&self.value(*p).data);
        }
        Ok(self.push(Op::Concat(parts.to_vec()), Tensor::vector(data)))
    }

    pub fn slice(&mut self, x: ValueId, start: usize, len: usize) -> Result<ValueId> {
        let xt = self.value(x);
        if start + len > xt.len() {
            return Err(Error::Dimension(format!(
                "slice [{start}, {}) of length-{} vector",
                start + len,
                xt.len()
            )));
        }
        let data = xt.data[start..start + len].to_vec();
        Ok(self.push(Op::Slice(x, start, len), Tensor::vector(data)))
    }

    pub fn sum(&mut self, x: ValueId) -> ValueId {
        let s: f64 = self.value(x).data.iter().sum();
        self.push(Op::Sum(x), Tensor::scalar(s))
    }

    pub fn dot(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        self.check_same_shape(a, b, "dot")?;
        let s: f64 = self
            .value(a)
            .data
            .iter()
            .zip(self.value(b).data.iter())
            .map(|(x, y)| x * y)
            .sum();
        Ok(self.push(Op::Dot(a, b), Tensor::scalar(s)))
    }

    /// Vector (or any tensor) times a scalar node.
    pub fn scale_by_node(&mut self, x: ValueId, s: ValueId) -> Result<ValueId> {
        if !self.value(s).is_scalar() {
            return Err(Error::Dimension("scale_by_node: scale is not a scalar".into()));
        }
        let sv = self.scalar(s);
        let data = self.value(x).data.iter().map(|v| v * sv).collect();
        let shape = self.value(x).shape.clone();
        Ok(self.push(Op::ScaleByNode(x, s), Tensor { shape, data }))
    }

    // ── Categorical heads ───────────────────────────────────────────────

    pub fn log_softmax(&mut self, logits: ValueId) -> Result<ValueId> {
        let lt = self.value(logits);
        if lt.is_empty() {
            return Err(Error::Domain("log_softmax of empty logits".into()));
        }
        let data = log_softmax_values(&lt.data);
        Ok(self.push(Op::LogSoftmax(logits), Tensor::vector(data)))
    }

    /// Entropy of the softmax distribution, as a scalar node.
    pub fn entropy_from_logits(&mut self, logits: ValueId) -> Result<ValueId> {
        let lt = self.value(logits);
        if lt.is_empty() {
            return Err(Error::Domain("entropy of empty logits".into()));
        }
        let logp = log_softmax_values(&lt.data);
        let h: f64 = logp.iter().map(|lp| -lp.exp() * lp).sum();
        Ok(self.push(Op::EntropyFromLogits(logits), Tensor::scalar(h)))
    }

    pub fn gather(&mut self, x: ValueId, index: usize) -> Result<ValueId> {
        let xt = self.value(x);
        if index >= xt.len() {
            return Err(Error::Dimension(format!(
                "gather index {index} out of {}",
                xt.len()
            )));
        }
        let v = xt.data[index];
        Ok(self.push(Op::Gather(x, index), Tensor::scalar(v)))
    }

    /// Sum a list of scalar nodes. Empty list yields a constant zero.
    pub fn sum_scalars(&mut self, ids: &[ValueId]) -> Result<ValueId> {
        match ids.split_first() {
            None => Ok(self.constant_scalar(0.0)),
            Some((first, rest)) => {
                let mut acc = *first;
                for id in rest {
                    acc = self.add(acc, *id)?;
                }
                Ok(acc)
            }
        }
    }

    // ── Backward ────────────────────────────────────────────────────────

    /// Accumulate d(root)/d(param) for every registered parameter leaf.
    /// `root` must be a scalar. Returns gradients in `ParamSet` order;
    /// parameters that never joined the graph get `None`.
    pub fn backward(&self, root: ValueId) -> Result<Vec<Option<Tensor>>> {
        if !self.value(root).is_scalar() {
            return Err(Error::Dimension(format!(
                "backward root must be scalar, got shape {:?}",
                self.value(root).shape
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=root.0).rev() {
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Const | Op::Param(_) => {
                    // Leaves keep their gradient; restore it for collection.
                    grads[idx] = Some(g);
                    continue;
                }
                Op::Add(a, b) => {
                    add_grad(&mut grads, *a, &g.data);
                    add_grad(&mut grads, *b, &g.data);
                }
                Op::Sub(a, b) => {
                    add_grad(&mut grads, *a, &g.data);
                    let neg: Vec<f64> = g.data.iter().map(|v| -v).collect();
                    add_grad(&mut grads, *b, &neg);
                }
                Op::Mul(a, b) => {
                    let da: Vec<f64> = g
                        .data
                        .iter()
                        .zip(self.nodes[b.0].value.data.iter())
                        .map(|(gv, bv)| gv * bv)
                        .collect();
                    let db: Vec<f64> = g
                        .data
                        .iter()
                        .zip(self.nodes[a.0].value.data.iter())
                        .map(|(gv, av)| gv * av)
                        .collect();
                    add_grad(&mut grads, *a, &da);
                    add_grad(&mut grads, *b, &db);
                }
                Op::Scale(x, c) => {
                    let dx: Vec<f64> = g.data.iter().map(|v| v * c).collect();
                    add_grad(&mut grads, *x, &dx);
                }
                Op::MatVec(w, x) => {
                    let wt = &self.nodes[w.0].value;
                    let xt = &self.nodes[x.0].value;
                    let (m, n) = (wt.shape[0], wt.shape[1]);
                    // dW = g outer x
                    let mut dw = vec![0.0; m * n];
                    for i in 0..m {
                        for j in 0..n {
                            dw[i * n + j] = g.data[i] * xt.data[j];
                        }
                    }
                    // dx = W^T g
                    let mut dx = vec![0.0; n];
                    for i in 0..m {
                        let gi = g.data[i];
                        let row = &wt.data[i * n..(i + 1) * n];
                        for j in 0..n {
                            dx[j] += row[j] * gi;
                        }
                    }
                    add_grad(&mut grads, *w, &dw);
                    add_grad(&mut grads, *x, &dx);
                }
                Op::Tanh(x) => {
                    let y = &node.value.data;
                    let dx: Vec<f64> = g
                        .data
                        .iter()
                        .zip(y.iter())
                        .map(|(gv, yv)| gv * (1.0 - yv * yv))
                        .collect();
                    add_grad(&mut grads, *x, &dx);
                }
                Op::Sigmoid(x) => {
                    let y = &node.value.data;
                    let dx: Vec<f64> = g
                        .data
                        .iter()
                        .zip(y.iter())
                        .map(|(gv, yv)| gv * yv * (1.0 - yv))
                        .collect();
                    add_grad(&mut grads, *x, &dx);
                }
                Op::Relu(x) => {
                    let inp = &self.nodes[x.0].value.data;
                    let dx: Vec<f64> = g
                        .data
                        .iter()
                        .zip(inp.iter())
                        .map(|(gv, xv)| if *xv > 0.0 { *gv } else { 0.0 })
                        .collect();
                    add_grad(&mut grads, *x, &dx);
                }
                Op::Exp(x) => {
                    let y = &node.value.data;
                    let dx: Vec<f64> = g.data.iter().zip(y.iter()).map(|(gv, yv)| gv * yv).collect();
                    add_grad(&mut grads, *x, &dx);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let len = self.nodes[p.0].value.len();
                        add_grad(&mut grads, *p, &g.data[offset..offset + len]);
                        offset += len;
                    }
                }
                Op::Slice(x, start, len) => {
                    let total = self.nodes[x.0].value.len();
                    let mut dx = vec![0.0; total];
                    dx[*start..start + len].copy_from_slice(&g.data);
                    add_grad(&mut grads, *x, &dx);
                }
                Op::Sum(x) => {
                    let n = self.nodes[x.0].value.len();
                    let dx = vec![g.data[0]; n];
                    add_grad(&mut grads, *x, &dx);
                }
                Op::Dot(a, b) => {
                    let gv = g.data[0];
                    let da: Vec<f64> =
                        self.nodes[b.0].value.data.iter().map(|v| gv * v).collect();
                    let db: Vec<f64> =
                        self.nodes[a.0].value.data.iter().map(|v| gv * v).collect();
                    add_grad(&mut grads, *a, &da);
                    add_grad(&mut grads, *b, &db);
                }
                Op::ScaleByNode(x, s) => {
                    let sv = self.nodes[s.0].value.item();
                    let dx: Vec<f64> = g.data.iter().map(|v| v * sv).collect();
                    let ds: f64 = g
                        .data
                        .iter()
                        .zip(self.nodes[x.0].value.data.iter())
                        .map(|(gv, xv)| gv * xv)
                        .sum();
                    add_grad(&mut grads, *x, &dx);
                    add_grad(&mut grads, *s, &[ds]);
                }
                Op::LogSoftmax(x) => {
                    // y = x - logsumexp(x); dx_i = g_i - p_i * sum(g)
                    let y = &node.value.data;
                    let gsum: f64 = g.data.iter().sum();
                    let dx: Vec<f64> = g
                        .data
                        .iter()
                        .zip(y.iter())
                        .map(|(gv, yv)| gv - yv.exp() * gsum)
                        .collect();
                    add_grad(&mut grads, *x, &dx);
                }
                Op::EntropyFromLogits(x) => {
                    // dH/dx_i = -p_i (log p_i + H)
                    let logits = &self.nodes[x.0].value.data;
                    let logp = log_softmax_values(logits);
                    let h = node.value.item();
                    let gv = g.data[0];
                    let dx: Vec<f64> = logp
                        .iter()
                        .map(|lp| gv * (-lp.exp() * (lp + h)))
                        .collect();
                    add_grad(&mut grads, *x, &dx);
                }
                Op::Gather(x, index) => {
                    let n = self.nodes[x.0].value.len();
                    let mut dx = vec![0.0; n];
                    dx[*index] = g.data[0];
                    add_grad(&mut grads, *x, &dx);
                }
            }
        }

        // Collect per-parameter gradients. A parameter can be bound to the
        // tape more than once; contributions accumulate.
        let mut out: Vec<Option<Tensor>> = (0..self.n_params).map(|_| None).collect();
        for (pid, vid) in &self.param_nodes {
            if let Some(g) = &grads[vid.0] {
                if g.has_nan() {
                    return Err(Error::Numeric(format!(
                        "NaN gradient for parameter slot {}",
                        pid.0
                    )));
                }
                match &mut out[pid.0] {
                    slot @ None => *slot = Some(g.clone()),
                    Some(acc) => {
                        for (a, b) in acc.data.iter_mut().zip(g.data.iter()) {
                            *a += b;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

fn add_grad(grads: &mut [Option<Tensor>], id: ValueId, contrib: &[f64]) {
    match &mut grads[id.0] {
        Some(t) => {
            debug_assert_eq!(t.data.len(), contrib.len());
            for (a, b) in t.data.iter_mut().zip(contrib.iter()) {
                *a += b;
            }
        }
        slot @ None => {
            *slot = Some(Tensor::vector(contrib.to_vec()));
        }
    }
}

/// Numerically stable log-softmax on raw values.
pub fn log_softmax_values(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    logits.iter().map(|v| v - lse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_and_backward() {
        let mut ps = ParamSet::new();
        let w = ps.add("w", Tensor::vector(vec![1.0, 2.0, 3.0]));
        let mut tape = Tape::new();
        let wv = tape.param(&ps, w);
        let c = tape.constant_vec(vec![0.5, 0.5, 0.5]);
        let s = tape.add(wv, c).unwrap();
        let loss = tape.sum(s);
        assert_eq!(tape.scalar(loss), 7.5);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads[0].as_ref().unwrap().data, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn matvec_values() {
        let mut ps = ParamSet::new();
        let w = ps.add("w", Tensor::new(vec![2, 3], vec![1.0, 0.0, -1.0, 2.0, 1.0, 0.0]).unwrap());
        let mut tape = Tape::new();
        let wv = tape.param(&ps, w);
        let x = tape.constant_vec(vec![1.0, 2.0, 3.0]);
        let y = tape.matvec(wv, x).unwrap();
        assert_eq!(tape.value(y).data, vec![-2.0, 4.0]);
    }

    #[test]
    fn log_softmax_sums_to_one() {
        let mut tape = Tape::new();
        let l = tape.constant_vec(vec![0.3, -1.2, 2.0, 0.0]);
        let lp = tape.log_softmax(l).unwrap();
        let total: f64 = tape.value(lp).data.iter().map(|v| v.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounds() {
        let mut tape = Tape::new();
        let uniform = tape.constant_vec(vec![0.0; 5]);
        let h_u = tape.entropy_from_logits(uniform).unwrap();
        assert!((tape.scalar(h_u) - (5.0f64).ln()).abs() < 1e-12);

        let peaked = tape.constant_vec(vec![50.0, 0.0, 0.0]);
        let h_p = tape.entropy_from_logits(peaked).unwrap();
        assert!(tape.scalar(h_p) >= 0.0 && tape.scalar(h_p) < 1e-12);
    }

    #[test]
    fn param_bound_twice_accumulates() {
        let mut ps = ParamSet::new();
        let w = ps.add("w", Tensor::vector(vec![2.0]));
        let mut tape = Tape::new();
        let a = tape.param(&ps, w);
        let b = tape.param(&ps, w);
        let prod = tape.mul(a, b).unwrap(); // w^2, d/dw = 2w = 4
        let loss = tape.sum(prod);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads[0].as_ref().unwrap().data, vec![4.0]);
    }

    #[test]
    fn backward_requires_scalar_root() {
        let mut tape = Tape::new();
        let v = tape.constant_vec(vec![1.0, 2.0]);
        assert!(tape.backward(v).is_err());
    }
}
