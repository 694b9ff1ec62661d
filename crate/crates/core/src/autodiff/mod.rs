//! Reverse-mode automatic differentiation and the neural building blocks the
//! tagger and ranker are made of.

mod adam;
pub mod check;
pub mod checkpoint;
mod graph;
pub mod nn;
mod params;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::Checkpoint;
pub(crate) use graph::softmax_in_place;
pub use graph::{Graph, Var};
pub use params::{Gradients, NamedTensor, ParamId, ParamStore, INIT_SCALE};
pub use tensor::Tensor;

/// Softmax of a plain slice, outside any graph.
pub fn softmax<T: crate::Scalar>(xs: &[T]) -> Vec<T> {
    let mut out = xs.to_vec();
    softmax_in_place(&mut out);
    out
}
