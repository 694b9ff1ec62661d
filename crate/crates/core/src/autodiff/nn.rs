//! Layers assembled from graph primitives.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, ParamId, ParamStore, Tensor, Var};
use crate::scalar::Scalar;

/// Initial value of the LSTM forget-gate bias.
pub const FORGET_BIAS: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub table: ParamId,
    pub rows: usize,
    pub dim: usize,
}

impl Embedding {
    pub fn new<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        rows: usize,
        dim: usize,
        rng: &mut R,
    ) -> Self {
        let table = store.add_uniform(name, &[rows, dim], rng);
        Embedding { table, rows, dim }
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<'_, T>, row: usize) -> Var {
        g.lookup(self.table, row)
    }
}

/// `W·x + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub input: usize,
    pub output: usize,
}

impl Linear {
    pub fn new<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        input: usize,
        output: usize,
        rng: &mut R,
    ) -> Self {
        let weight = store.add_uniform(&format!("{name}.weight"), &[output, input], rng);
        let bias = store.add_uniform(&format!("{name}.bias"), &[output], rng);
        Linear {
            weight,
            bias,
            input,
            output,
        }
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<'_, T>, x: Var) -> Var {
        let w = g.param(self.weight);
        let b = g.param(self.bias);
        let wx = g.matvec(w, x);
        g.add(wx, b)
    }
}

/// One tanh hidden layer followed by a linear output layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mlp {
    pub hidden: Linear,
    pub output: Linear,
}

impl Mlp {
    pub fn new<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        input: usize,
        hidden: usize,
        output: usize,
        rng: &mut R,
    ) -> Self {
        Mlp {
            hidden: Linear::new(store, &format!("{name}.hidden"), input, hidden, rng),
            output: Linear::new(store, &format!("{name}.output"), hidden, output, rng),
        }
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<'_, T>, x: Var) -> Var {
        let h = self.hidden.forward(g, x);
        let h = g.tanh(h);
        self.output.forward(g, h)
    }
}

/// LSTM cell with input, forget and output gates.
///
/// The stacked weight matrix maps `[x; h_prev]` to the pre-activations of
/// `[i, f, o, g]`, each `hidden` rows tall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lstm {
    pub weight: ParamId,
    pub bias: ParamId,
    pub input: usize,
    pub hidden: usize,
}

impl Lstm {
    pub fn new<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        input: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Self {
        let weight = store.add_uniform(
            &format!("{name}.weight"),
            &[4 * hidden, input + hidden],
            rng,
        );
        let bias = store.add_uniform(&format!("{name}.bias"), &[4 * hidden], rng);
        let b = store.get_mut(bias).data_mut();
        for v in &mut b[hidden..2 * hidden] {
            *v = T::of(FORGET_BIAS);
        }
        Lstm {
            weight,
            bias,
            input,
            hidden,
        }
    }

    /// One time step. Returns `(h, c)`.
    pub fn step<T: Scalar>(&self, g: &mut Graph<'_, T>, x: Var, h: Var, c: Var) -> (Var, Var) {
        let n = self.hidden;
        let w = g.param(self.weight);
        let b = g.param(self.bias);
        let xh = g.concat(&[x, h]);
        let z = g.matvec(w, xh);
        let z = g.add(z, b);
        let i = g.slice(z, 0, n);
        let i = g.sigmoid(i);
        let f = g.slice(z, n, n);
        let f = g.sigmoid(f);
        let o = g.slice(z, 2 * n, n);
        let o = g.sigmoid(o);
        let cand = g.slice(z, 3 * n, n);
        let cand = g.tanh(cand);
        let keep = g.mul(f, c);
        let write = g.mul(i, cand);
        let c_next = g.add(keep, write);
        let squashed = g.tanh(c_next);
        let h_next = g.mul(o, squashed);
        (h_next, c_next)
    }

    /// Runs the cell over `inputs` from a zero state; returns every `h`.
    pub fn run<T: Scalar>(&self, g: &mut Graph<'_, T>, inputs: &[Var]) -> Vec<Var> {
        let mut h = g.zeros(self.hidden);
        let mut c = g.zeros(self.hidden);
        let mut out = Vec::with_capacity(inputs.len());
        for &x in inputs {
            (h, c) = self.step(g, x, h, c);
            out.push(h);
        }
        out
    }
}

/// Forward and backward LSTMs whose states are concatenated per position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiLstm {
    pub forward: Lstm,
    pub backward: Lstm,
}

impl BiLstm {
    /// `output` is the concatenated size and must be even.
    pub fn new<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        input: usize,
        output: usize,
        rng: &mut R,
    ) -> Self {
        assert!(
            output > 0 && output.is_multiple_of(2),
            "Bi-LSTM output size must be even and positive, got {output}"
        );
        BiLstm {
            forward: Lstm::new(store, &format!("{name}.fwd"), input, output / 2, rng),
            backward: Lstm::new(store, &format!("{name}.bwd"), input, output / 2, rng),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.forward.hidden + self.backward.hidden
    }

    /// Encodes a non-empty sequence; panics on an empty one.
    pub fn encode<T: Scalar>(&self, g: &mut Graph<'_, T>, inputs: &[Var]) -> Vec<Var> {
        assert!(!inputs.is_empty(), "Bi-LSTM input sequence is empty");
        let fwd = self.forward.run(g, inputs);
        let reversed: Vec<Var> = inputs.iter().rev().copied().collect();
        let mut bwd = self.backward.run(g, &reversed);
        bwd.reverse();
        fwd.into_iter()
            .zip(bwd)
            .map(|(f, b)| g.concat(&[f, b]))
            .collect()
    }
}

/// Zeroes every tensor in the store; handy for symmetry tests.
pub fn zero_all<T: Scalar>(store: &mut ParamStore<T>) {
    let ids: Vec<ParamId> = store.ids().collect();
    for id in ids {
        store.get_mut(id).fill(T::zero());
    }
}

/// Copies a tensor into a parameter slot, checking the shape.
pub fn assign<T: Scalar>(store: &mut ParamStore<T>, id: ParamId, value: Tensor<T>) {
    let slot = store.get_mut(id);
    assert_eq!(slot.shape(), value.shape(), "assign: shape mismatch");
    *slot = value;
}
