use serde::Serialize;

use crate::corpus::{Document, Domain, Edge, MetaNode, NodeRef, TemporalTree};

/// How predicted nodes fared when gold edges were carried over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MappingStats {
    pub predicted: usize,
    /// Predicted nodes matched to a gold node.
    pub matched: usize,
    /// Predicted nodes with no overlapping gold node of the same kind.
    pub spurious: usize,
    /// Matched nodes whose gold parent had no predicted counterpart (or
    /// whose inherited edge would have closed a cycle).
    pub parent_unmapped: usize,
    /// Gold nodes no prediction was matched to.
    pub gold_missed: usize,
}

impl MappingStats {
    pub fn merge(&mut self, o: MappingStats) {
        self.predicted += o.predicted;
        self.matched += o.matched;
        self.spurious += o.spurious;
        self.parent_unmapped += o.parent_unmapped;
        self.gold_missed += o.gold_missed;
    }
}

/// Best partner by overlap among `others` of the same kind; earliest wins
/// ties.
fn best_match(a: &Document, i: usize, b: &Document) -> Option<usize> {
    let n = &a.nodes[i];
    let mut best: Option<(usize, usize)> = None;
    for (j, m) in b.nodes.iter().enumerate() {
        let ov = n.span.overlap_len(&m.span);
        if ov > 0 && m.kind() == n.kind() && best.is_none_or(|(_, o)| ov > o) {
            best = Some((j, ov));
        }
    }
    best.map(|(j, _)| j)
}

/// Gives `predicted` (nodes only) the gold tree of `gold`: a predicted node
/// takes the edge of the gold node it overlaps most with the same kind, and
/// the parent is translated to the prediction that best covers the gold
/// parent. Anything left over attaches to DCT with the domain relation.
pub fn map_gold_edges(gold: &Document, predicted: &Document) -> (Document, MappingStats) {
    let fallback = (
        NodeRef::Meta(MetaNode::Dct),
        gold.domain.unwrap_or(Domain::News).default_relation(),
    );
    let gold_tree = TemporalTree::from_document(gold).ok();
    let n = predicted.nodes.len();
    let mut stats = MappingStats {
        predicted: n,
        ..MappingStats::default()
    };
    let rep: Vec<Option<usize>> = (0..gold.nodes.len())
        .map(|g| best_match(gold, g, predicted))
        .collect();
    stats.gold_missed = rep.iter().filter(|r| r.is_none()).count();

    let mut parents = vec![fallback; n];
    for (p, slot) in parents.iter_mut().enumerate() {
        let (Some(tree), Some(g)) = (&gold_tree, best_match(predicted, p, gold)) else {
            stats.spurious += 1;
            continue;
        };
        stats.matched += 1;
        let parent = match tree.parent(g) {
            NodeRef::Meta(m) => Some(NodeRef::Meta(m)),
            NodeRef::Text(gp) => rep[gp].filter(|&q| q != p).map(NodeRef::Text),
        };
        match parent {
            Some(parent) => *slot = (parent, tree.relation(g)),
            None => stats.parent_unmapped += 1,
        }
    }
    // Break any cycle by sending its earliest node to the fallback.
    for start in 0..n {
        let mut cur = start;
        let mut steps = 0;
        while let NodeRef::Text(q) = parents[cur].0 {
            cur = q;
            steps += 1;
            if cur == start || steps > n {
                parents[start] = fallback;
                stats.parent_unmapped += 1;
                break;
            }
        }
    }
    let mut out = predicted.clone();
    out.domain = gold.domain;
    out.edges = parents
        .iter()
        .enumerate()
        .map(|(i, &(p, relation))| Edge {
            child: out.nodes[i].id,
            parent: out.ref_id(p),
            relation,
        })
        .collect();
    (out, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_documents, NodeType, Relation, Span};

    const GOLD: &str = r#"{"id":"m","tokens":[["a","NT"],["b","VV"],["c","VV"],["d","NN"],["e","VV"]],"sentences":[[0,5]],"nodes":[{"id":0,"span":[0,1],"kind":"time","subtype":"absolute-concrete"},{"id":1,"span":[2,3],"kind":"event","subtype":"event"},{"id":2,"span":[4,5],"kind":"event","subtype":"state"}],"edges":[{"child":0,"parent":-1,"relation":"depend-on"},{"child":1,"parent":0,"relation":"includes"},{"child":2,"parent":1,"relation":"overlap"}],"domain":"grimm"}"#;

    fn gold() -> Document {
        parse_documents(GOLD, "t").unwrap().remove(0)
    }

    #[test]
    fn identical_nodes_keep_edges() {
        let g = gold();
        let mut p = g.clone();
        p.edges.clear();
        let (m, s) = map_gold_edges(&g, &p);
        assert_eq!(m.edges, g.edges);
        assert_eq!(
            (s.matched, s.spurious, s.parent_unmapped, s.gold_missed),
            (3, 0, 0, 0)
        );
    }

    #[test]
    fn wider_span_inherits_and_spurious_goes_to_dct() {
        let g = gold();
        let mut p = g.clone();
        p.set_nodes(vec![
            (Span::new(0, 1), NodeType::AbsoluteConcrete),
            (Span::new(2, 4), NodeType::Event),
            (Span::new(4, 5), NodeType::State),
        ])
        .unwrap();
        let (m, _) = map_gold_edges(&g, &p);
        assert_eq!(m.edges[1].parent, crate::corpus::NodeId(0));
        assert_eq!(m.edges[1].relation, Relation::Includes);

        p.set_nodes(vec![
            (Span::new(1, 2), NodeType::Event),
            (Span::new(3, 4), NodeType::Event),
        ])
        .unwrap();
        let (m, s) = map_gold_edges(&g, &p);
        assert_eq!(s.spurious, 2);
        assert!(m
            .edges
            .iter()
            .all(|e| e.parent == MetaNode::Dct.id() && e.relation == Relation::Before));
        m.validate().unwrap();
    }
}
