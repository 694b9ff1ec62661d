use crate::corpus::{Document, Kind, MetaNode, NodeRef};

/// Sentences after the child's own that still fall inside its window.
pub const WINDOW_AFTER: usize = 2;

/// Possible parents of one text node: every meta node, then the text nodes
/// of the window in textual order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub child: usize,
    pub candidates: Vec<NodeRef>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn position(&self, r: NodeRef) -> Option<usize> {
        self.candidates.iter().position(|&c| c == r)
    }
}

/// The window runs from the start of the document to two sentences after the
/// child. Time expressions only see other time expressions.
pub fn extract_candidates(doc: &Document, child: usize) -> CandidateSet {
    let node = &doc.nodes[child];
    let last_sent = node.sent + WINDOW_AFTER;
    let time_only = node.kind() == Kind::Time;
    let mut candidates: Vec<NodeRef> = MetaNode::ALL.iter().map(|&m| NodeRef::Meta(m)).collect();
    candidates.extend(
        doc.nodes
            .iter()
            .enumerate()
            .take_while(|(_, n)| n.sent <= last_sent)
            .filter(|&(j, n)| j != child && (!time_only || n.kind() == Kind::Time))
            .map(|(j, _)| NodeRef::Text(j)),
    );
    CandidateSet { child, candidates }
}

pub fn candidate_sets(doc: &Document) -> Vec<CandidateSet> {
    (0..doc.nodes.len())
        .map(|i| extract_candidates(doc, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{NodeType, Span, Token};

    fn doc(sentences: usize, nodes: &[(usize, NodeType)]) -> Document {
        let tokens = (0..sentences * 3)
            .map(|i| Token::new(format!("t{i}"), "NN"))
            .collect();
        let spans = (0..sentences)
            .map(|s| Span::new(3 * s, 3 * s + 3))
            .collect();
        let mut d = Document::new("d", tokens, spans);
        let mut per_sent = vec![0; sentences];
        let spans = nodes
            .iter()
            .map(|&(s, t)| {
                let k = per_sent[s];
                per_sent[s] += 1;
                (Span::new(3 * s + k, 3 * s + k + 1), t)
            })
            .collect();
        d.set_nodes(spans).unwrap();
        d
    }

    #[test]
    fn lone_event_sees_meta_only() {
        let d = doc(1, &[(0, NodeType::Event)]);
        let c = extract_candidates(&d, 0);
        assert_eq!(c.len(), 5);
        assert!(c.candidates.iter().all(|r| r.is_meta()));
    }

    #[test]
    fn time_child_sees_time_only() {
        let d = doc(
            2,
            &[
                (0, NodeType::Event),
                (0, NodeType::AbsoluteConcrete),
                (0, NodeType::State),
                (1, NodeType::Event),
                (1, NodeType::VagueTime),
            ],
        );
        let c = extract_candidates(&d, 4);
        assert_eq!(c.len(), 6);
        assert_eq!(c.candidates[5], NodeRef::Text(1));
    }

    #[test]
    fn window_stops_two_sentences_ahead() {
        let d = doc(
            5,
            &[
                (0, NodeType::Event),
                (1, NodeType::Event),
                (2, NodeType::Event),
                (3, NodeType::Event),
                (4, NodeType::Event),
            ],
        );
        let c = extract_candidates(&d, 0);
        assert_eq!(&c.candidates[5..], &[NodeRef::Text(1), NodeRef::Text(2)]);
        let c = extract_candidates(&d, 4);
        assert_eq!(c.len(), 9);
    }
}
