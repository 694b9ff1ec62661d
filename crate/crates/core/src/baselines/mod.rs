//! Comparison systems: the previous-node heuristic and a logistic-regression
//! ranker over hand-written features.

mod features;
mod logreg;
mod simple;

pub use features::{extract_features, quoted_tokens};
pub use logreg::{
    logreg_train, FeatureVector, LogRegConfig, LogRegModel, LogRegTrainConfig, CHECKPOINT_KIND,
};
pub use simple::simple_baseline;
