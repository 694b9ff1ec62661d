//! Reverse-mode tape.
//!
//! A [`Graph`] borrows the parameter store immutably, records every primitive
//! in execution order and, on [`Graph::backward`], replays the record in exact
//! reverse order. Parameters never get copied onto the tape; their gradients
//! land straight in a [`Gradients`] buffer aligned with the store.

use std::collections::HashMap;

use super::{Gradients, ParamId, ParamStore, Tensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Handle to a value recorded on a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Param(ParamId),
    Input,
    Lookup { table: ParamId, row: usize },
    MatVec(Var, Var),
    Add(Var, Var),
    Mul(Var, Var),
    Concat(Vec<Var>),
    Slice { input: Var, start: usize },
    Tanh(Var),
    Sigmoid(Var),
    Sum(Vec<Var>),
    Softmax(Var),
    WeightedSum { weights: Var, items: Vec<Var> },
    CrossEntropy { scores: Var, gold: usize },
}

struct Node<T> {
    op: Op,
    // `None` only for parameter leaves, whose value lives in the store.
    value: Option<Tensor<T>>,
}

pub struct Graph<'p, T> {
    params: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
    param_vars: HashMap<ParamId, Var>,
}

fn shape_error(op: &str, a: &[usize], b: &[usize]) -> ! {
    panic!("shape mismatch in {op}: {a:?} vs {b:?}")
}

pub(crate) fn softmax_in_place<T: Scalar>(xs: &mut [T]) {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let mut total = T::zero();
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    for x in xs.iter_mut() {
        *x /= total;
    }
}

/// Numerically stable `log Σ exp(x)`.
pub(crate) fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let (arg, max) = xs
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, T::neg_infinity()),
            |a, (i, x)| if x > a.1 { (i, x) } else { a },
        );
    // ln(1 + rest) keeps precision when the maximum dominates.
    let rest: T = xs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != arg)
        .map(|(_, &x)| (x - max).exp())
        .sum();
    max + rest.ln_1p()
}

fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

impl<'p, T: Scalar> Graph<'p, T> {
    pub fn new(params: &'p ParamStore<T>) -> Self {
        Graph {
            params,
            nodes: Vec::new(),
            param_vars: HashMap::new(),
        }
    }

    pub fn params(&self) -> &'p ParamStore<T> {
        self.params
    }

    /// Number of recorded operations.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        let node = &self.nodes[v.0];
        match (&node.op, &node.value) {
            (_, Some(t)) => t,
            (Op::Param(id), None) => self.params.get(*id),
            _ => unreachable!("non-parameter node without value"),
        }
    }

    fn push(&mut self, op: Op, value: Tensor<T>) -> Var {
        self.nodes.push(Node {
            op,
            value: Some(value),
        });
        Var(self.nodes.len() - 1)
    }

    /// Leaf for a trainable parameter. Repeated calls return the same handle.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(&v) = self.param_vars.get(&id) {
            return v;
        }
        self.nodes.push(Node {
            op: Op::Param(id),
            value: None,
        });
        let v = Var(self.nodes.len() - 1);
        self.param_vars.insert(id, v);
        v
    }

    /// Constant leaf; receives no gradient.
    pub fn input(&mut self, t: Tensor<T>) -> Var {
        self.push(Op::Input, t)
    }

    pub fn zeros(&mut self, n: usize) -> Var {
        self.input(Tensor::zeros(&[n]))
    }

    /// Row `row` of an embedding table, as a vector.
    pub fn lookup(&mut self, table: ParamId, row: usize) -> Var {
        let t = self.params.get(table);
        assert!(
            t.shape().len() == 2 && row < t.rows(),
            "embedding row {row} out of range for table {:?}",
            t.shape()
        );
        let v = Tensor::vector(t.row(row).to_vec());
        self.push(Op::Lookup { table, row }, v)
    }

    pub fn matvec(&mut self, w: Var, x: Var) -> Var {
        let (wt, xt) = (self.value(w), self.value(x));
        if wt.shape().len() != 2 || xt.shape().len() != 1 || wt.cols() != xt.len() {
            shape_error("matvec", wt.shape(), xt.shape());
        }
        let cols = wt.cols();
        let xs = xt.data();
        let out: Vec<T> = wt
            .data()
            .chunks_exact(cols)
            .map(|row| {
                let mut acc = T::zero();
                for (&a, &b) in row.iter().zip(xs) {
                    acc += a * b;
                }
                acc
            })
            .collect();
        self.push(Op::MatVec(w, x), Tensor::vector(out))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let (at, bt) = (self.value(a), self.value(b));
        if at.len() != bt.len() {
            shape_error("add", at.shape(), bt.shape());
        }
        let out = at
            .data()
            .iter()
            .zip(bt.data())
            .map(|(&x, &y)| x + y)
            .collect();
        self.push(Op::Add(a, b), Tensor::vector(out))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (at, bt) = (self.value(a), self.value(b));
        if at.len() != bt.len() {
            shape_error("mul", at.shape(), bt.shape());
        }
        let out = at
            .data()
            .iter()
            .zip(bt.data())
            .map(|(&x, &y)| x * y)
            .collect();
        self.push(Op::Mul(a, b), Tensor::vector(out))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "concat of zero vectors");
        let mut out = Vec::new();
        for &p in parts {
            out.extend_from_slice(self.value(p).data());
        }
        self.push(Op::Concat(parts.to_vec()), Tensor::vector(out))
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Var {
        let xt = self.value(x);
        if start + len > xt.len() {
            shape_error("slice", xt.shape(), &[start, start + len]);
        }
        let out = xt.data()[start..start + len].to_vec();
        self.push(Op::Slice { input: x, start }, Tensor::vector(out))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let out = self.value(x).data().iter().map(|v| v.tanh()).collect();
        self.push(Op::Tanh(x), Tensor::vector(out))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = self.value(x).data().iter().map(|&v| sigmoid(v)).collect();
        self.push(Op::Sigmoid(x), Tensor::vector(out))
    }

    /// Elementwise sum of equally sized vectors.
    pub fn sum(&mut self, items: &[Var]) -> Var {
        assert!(!items.is_empty(), "sum of zero vectors");
        let mut out = self.value(items[0]).data().to_vec();
        for &it in &items[1..] {
            let t = self.value(it);
            if t.len() != out.len() {
                shape_error("sum", &[out.len()], t.shape());
            }
            for (o, &v) in out.iter_mut().zip(t.data()) {
                *o += v;
            }
        }
        self.push(Op::Sum(items.to_vec()), Tensor::vector(out))
    }

    pub fn softmax(&mut self, x: Var) -> Var {
        let mut out = self.value(x).data().to_vec();
        assert!(!out.is_empty(), "softmax of empty vector");
        softmax_in_place(&mut out);
        self.push(Op::Softmax(x), Tensor::vector(out))
    }

    /// `Σ_t weights[t] · items[t]`.
    pub fn weighted_sum(&mut self, weights: Var, items: &[Var]) -> Var {
        let wt = self.value(weights);
        if wt.len() != items.len() || items.is_empty() {
            shape_error("weighted_sum", wt.shape(), &[items.len()]);
        }
        let ws = wt.data().to_vec();
        let dim = self.value(items[0]).len();
        let mut out = vec![T::zero(); dim];
        for (&w, &it) in ws.iter().zip(items) {
            let t = self.value(it);
            if t.len() != dim {
                shape_error("weighted_sum", &[dim], t.shape());
            }
            for (o, &v) in out.iter_mut().zip(t.data()) {
                *o += w * v;
            }
        }
        self.push(
            Op::WeightedSum {
                weights,
                items: items.to_vec(),
            },
            Tensor::vector(out),
        )
    }

    /// `-log softmax(scores)[gold]` as a one-element vector.
    pub fn cross_entropy(&mut self, scores: Var, gold: usize) -> Var {
        let st = self.value(scores);
        assert!(
            st.shape().len() == 1 && gold < st.len(),
            "gold index {gold} out of range for scores of shape {:?}",
            st.shape()
        );
        let max = st.data().iter().copied().fold(T::neg_infinity(), T::max);
        let shifted: Vec<T> = st.data().iter().map(|&x| x - max).collect();
        let loss = log_sum_exp(&shifted) - shifted[gold];
        self.push(Op::CrossEntropy { scores, gold }, Tensor::scalar(loss))
    }

    /// Reverse pass from a scalar `loss`. Consumes the tape.
    pub fn backward(self, loss: Var) -> Result<Gradients<T>> {
        if self.nodes.is_empty() || loss.0 >= self.nodes.len() {
            return Err(Error::NoForward);
        }
        let lt = self.value(loss);
        if lt.len() != 1 {
            return Err(Error::NonScalarLoss(lt.shape().to_vec()));
        }
        let mut pgrads = Gradients::zeros_like(self.params);
        let mut grads: Vec<Option<Vec<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            let out = node.value.as_ref();
            match &node.op {
                Op::Param(id) => add_into(pgrads.get_mut(*id).data_mut(), &g),
                Op::Input => {}
                Op::Lookup { table, row } => {
                    add_into(pgrads.get_mut(*table).row_mut(*row), &g);
                }
                Op::MatVec(w, x) => {
                    let wt = self.value(*w);
                    let xt = self.value(*x);
                    let cols = wt.cols();
                    {
                        let dw = self.slot(&mut grads, &mut pgrads, *w);
                        for (r, &gr) in g.iter().enumerate() {
                            if gr == T::zero() {
                                continue;
                            }
                            let row = &mut dw[r * cols..(r + 1) * cols];
                            for (d, &xv) in row.iter_mut().zip(xt.data()) {
                                *d += gr * xv;
                            }
                        }
                    }
                    let dx = self.slot(&mut grads, &mut pgrads, *x);
                    for (r, &gr) in g.iter().enumerate() {
                        if gr == T::zero() {
                            continue;
                        }
                        for (d, &wv) in dx.iter_mut().zip(wt.row(r)) {
                            *d += gr * wv;
                        }
                    }
                }
                Op::Add(a, b) => {
                    add_into(self.slot(&mut grads, &mut pgrads, *a), &g);
                    add_into(self.slot(&mut grads, &mut pgrads, *b), &g);
                }
                Op::Mul(a, b) => {
                    let av = self.value(*a).data();
                    let bv = self.value(*b).data();
                    let da = self.slot(&mut grads, &mut pgrads, *a);
                    for ((d, &gv), &bx) in da.iter_mut().zip(&g).zip(bv) {
                        *d += gv * bx;
                    }
                    let db = self.slot(&mut grads, &mut pgrads, *b);
                    for ((d, &gv), &ax) in db.iter_mut().zip(&g).zip(av) {
                        *d += gv * ax;
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let n = self.value(p).len();
                        add_into(
                            self.slot(&mut grads, &mut pgrads, p),
                            &g[offset..offset + n],
                        );
                        offset += n;
                    }
                }
                Op::Slice { input, start } => {
                    let dx = self.slot(&mut grads, &mut pgrads, *input);
                    add_into(&mut dx[*start..*start + g.len()], &g);
                }
                Op::Tanh(x) => {
                    let y = out.expect("tanh value").data();
                    let dx = self.slot(&mut grads, &mut pgrads, *x);
                    for ((d, &gv), &yv) in dx.iter_mut().zip(&g).zip(y) {
                        *d += gv * (T::one() - yv * yv);
                    }
                }
                Op::Sigmoid(x) => {
                    let y = out.expect("sigmoid value").data();
                    let dx = self.slot(&mut grads, &mut pgrads, *x);
                    for ((d, &gv), &yv) in dx.iter_mut().zip(&g).zip(y) {
                        *d += gv * yv * (T::one() - yv);
                    }
                }
                Op::Sum(items) => {
                    for &it in items {
                        add_into(self.slot(&mut grads, &mut pgrads, it), &g);
                    }
                }
                Op::Softmax(x) => {
                    let y = out.expect("softmax value").data();
                    let dot: T = g.iter().zip(y).map(|(&a, &b)| a * b).sum();
                    let dx = self.slot(&mut grads, &mut pgrads, *x);
                    for ((d, &gv), &yv) in dx.iter_mut().zip(&g).zip(y) {
                        *d += yv * (gv - dot);
                    }
                }
                Op::WeightedSum { weights, items } => {
                    let ws = self.value(*weights).data();
                    for (t, &it) in items.iter().enumerate() {
                        let dot: T = self
                            .value(it)
                            .data()
                            .iter()
                            .zip(&g)
                            .map(|(&a, &b)| a * b)
                            .sum();
                        self.slot(&mut grads, &mut pgrads, *weights)[t] += dot;
                        let w = ws[t];
                        let di = self.slot(&mut grads, &mut pgrads, it);
                        for (d, &gv) in di.iter_mut().zip(&g) {
                            *d += w * gv;
                        }
                    }
                }
                Op::CrossEntropy { scores, gold } => {
                    let mut p = self.value(*scores).data().to_vec();
                    softmax_in_place(&mut p);
                    p[*gold] -= T::one();
                    let scale = g[0];
                    let ds = self.slot(&mut grads, &mut pgrads, *scores);
                    for (d, &pv) in ds.iter_mut().zip(&p) {
                        *d += scale * pv;
                    }
                }
            }
        }
        Ok(pgrads)
    }

    /// Gradient buffer for `v`: the parameter accumulator for parameter leaves,
    /// otherwise a lazily allocated per-node buffer.
    fn slot<'a>(
        &self,
        grads: &'a mut [Option<Vec<T>>],
        pgrads: &'a mut Gradients<T>,
        v: Var,
    ) -> &'a mut [T] {
        match &self.nodes[v.0].op {
            Op::Param(id) => pgrads.get_mut(*id).data_mut(),
            _ => {
                let n = self.value(v).len();
                grads[v.0].get_or_insert_with(|| vec![T::zero(); n])
            }
        }
    }
}

fn add_into<T: Scalar>(dst: &mut [T], src: &[T]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
