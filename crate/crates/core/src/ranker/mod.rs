//! Neural ranking parser: candidate generation, pair scoring with three
//! representation variants, greedy tree decoding, and training.

mod candidates;
mod decode;
mod features;
mod model;
mod train;

pub use candidates::{candidate_sets, extract_candidates, CandidateSet, WINDOW_AFTER};
pub use decode::{
    decode, default_relation, greedy_decode, legal_entries, CandidateScorer, Decision, ParseResult,
};
pub use features::{nd_class, one_hot, ss_class, ND_WIDTH, SS_WIDTH};
pub use model::{Mode, RankerConfig, RankerModel, Variant, CHECKPOINT_KIND};
pub use train::{attachment_score, rank_train, RankTrainConfig};

pub(crate) use model::adopt;
pub(crate) use train::gold_trees;
