//! Temporal dependency parsing.
//!
//! Time expressions and events are found by a Bi-LSTM BIO tagger
//! ([`tagger`]) and arranged into a temporal dependency tree by a neural
//! ranking parser ([`ranker`]). [`baselines`] holds the two comparison
//! systems and [`eval`] the scoring protocols. All neural components sit on
//! the small reverse-mode engine in [`autodiff`].
//!
//! Models are generic over the element type ([`Scalar`]); the aliases at the
//! crate root fix it to `f64`, which is what training uses.

pub mod autodiff;
pub mod baselines;
pub mod corpus;
mod error;
pub mod eval;
pub mod ranker;
mod scalar;
pub mod tagger;
pub mod training;
pub mod vocab;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tensor = autodiff::Tensor<f64>;
pub type ParamStore = autodiff::ParamStore<f64>;
pub type Ranker = ranker::RankerModel<f64>;
pub type LogReg = baselines::LogRegModel<f64>;
pub type Tagger = tagger::TaggerModel<f64>;
