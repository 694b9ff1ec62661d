use crate::corpus::{Document, NodeRef};

pub const ND_WIDTH: usize = 4;
pub const SS_WIDTH: usize = 2;

/// Node-distance class: 0 when the candidate is the immediately preceding
/// node, 1 when further back in the same sentence, 2 when further back in an
/// earlier sentence, 3 when it does not precede the child. Meta candidates
/// fall in class 3.
pub fn nd_class(doc: &Document, child: usize, cand: NodeRef) -> usize {
    match cand {
        NodeRef::Meta(_) => 3,
        NodeRef::Text(j) => {
            let diff = child as i64 - j as i64;
            if diff == 1 {
                0
            } else if diff < 1 {
                3
            } else if doc.nodes[child].sent == doc.nodes[j].sent {
                1
            } else {
                2
            }
        }
    }
}

/// 0 for the same sentence, 1 otherwise (always 1 for meta candidates).
pub fn ss_class(doc: &Document, child: usize, cand: NodeRef) -> usize {
    match cand {
        NodeRef::Text(j) if doc.nodes[j].sent == doc.nodes[child].sent => 0,
        _ => 1,
    }
}

pub fn one_hot(width: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; width];
    v[k] = 1.0;
    v
}
