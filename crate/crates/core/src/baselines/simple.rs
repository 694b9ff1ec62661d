use crate::corpus::{chain_parent, Document, Relation, TemporalTree};
use crate::ranker::ParseResult;

/// Attaches every node to the node just before it (time expressions to the
/// previous time expression) and the first to DCT, all with `relation`.
pub fn simple_baseline(doc: &Document, relation: Relation) -> ParseResult {
    let parents = (0..doc.nodes.len())
        .map(|i| (chain_parent(&doc.nodes, i), relation))
        .collect();
    ParseResult {
        tree: TemporalTree::new(parents),
        decisions: Vec::new(),
    }
}
