//! Span and attachment scoring plus the parent-locality and relation
//! confusion matrices. Every figure is micro-averaged over documents.

mod confusion;
mod prf;
mod report;

pub use confusion::{
    parent_locality_confusion, relation_confusion, ConfusionMatrix, LocalityConfusion,
};
pub use prf::{attachment_prf, node_key, span_prf, NodeKey, Prf, SpanMode, SpanScores};
pub use report::{evaluate, EvalReport};

use std::collections::HashMap;

use crate::corpus::Document;
use crate::{Error, Result};

/// Pairs gold and predicted documents by id. Fails listing every id present
/// on only one side.
pub fn align<'a>(
    gold: &'a [Document],
    pred: &'a [Document],
) -> Result<Vec<(&'a Document, &'a Document)>> {
    let by_id: HashMap<&str, &Document> = pred.iter().map(|d| (d.id.as_str(), d)).collect();
    let gold_ids: HashMap<&str, ()> = gold.iter().map(|d| (d.id.as_str(), ())).collect();
    let missing: Vec<&str> = gold
        .iter()
        .map(|d| d.id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    let extra: Vec<&str> = pred
        .iter()
        .map(|d| d.id.as_str())
        .filter(|id| !gold_ids.contains_key(id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() || gold.len() != pred.len() {
        return Err(Error::Precondition(format!(
            "document ids differ: missing from prediction [{}], not in gold [{}]",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    Ok(gold.iter().map(|g| (g, by_id[g.id.as_str()])).collect())
}
