//! Stage one: a Bi-LSTM BIO tagger finding typed time and event spans, a
//! fallback POS tagger, and the transfer of gold edges onto predicted spans.

mod folds;
mod mapping;
mod model;
mod pos;

pub use folds::cross_validate_tagger;
pub use mapping::{map_gold_edges, MappingStats};
pub use model::{
    span_score, tag_predict, tag_train, TagTrainConfig, TaggerConfig, TaggerModel, CHECKPOINT_KIND,
};
pub use pos::{PosTagger, FALLBACK_POS};
