use std::fmt;

use super::{Document, NodeType, Span};
use crate::error::{Error, Result};

/// `O` plus `B-`/`I-` for each of the eleven text node types.
pub const NUM_BIO_TAGS: usize = 1 + 2 * NodeType::TEXT.len();

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BioTag {
    O,
    B(NodeType),
    I(NodeType),
}

impl BioTag {
    /// Dense label index: `O` = 0, `B-t` = 1 + 2k, `I-t` = 2 + 2k.
    pub fn index(self) -> usize {
        match self {
            BioTag::O => 0,
            BioTag::B(t) => 1 + 2 * t.text_index().expect("text type"),
            BioTag::I(t) => 2 + 2 * t.text_index().expect("text type"),
        }
    }

    pub fn from_index(i: usize) -> BioTag {
        assert!(i < NUM_BIO_TAGS, "BIO label index {i} out of range");
        if i == 0 {
            return BioTag::O;
        }
        let t = NodeType::TEXT[(i - 1) / 2];
        if i % 2 == 1 {
            BioTag::B(t)
        } else {
            BioTag::I(t)
        }
    }

    pub fn all() -> impl Iterator<Item = BioTag> {
        (0..NUM_BIO_TAGS).map(BioTag::from_index)
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioTag::O => f.write_str("O"),
            BioTag::B(t) => write!(f, "B-{t}"),
            BioTag::I(t) => write!(f, "I-{t}"),
        }
    }
}

/// Tags for a token sequence of length `len` from non-overlapping typed spans.
pub fn encode_spans(len: usize, spans: &[(Span, NodeType)]) -> Result<Vec<BioTag>> {
    let mut tags = vec![BioTag::O; len];
    let mut sorted: Vec<&(Span, NodeType)> = spans.iter().collect();
    sorted.sort_by_key(|(s, _)| (s.start, s.end));
    for w in sorted.windows(2) {
        if w[0].0.overlaps(&w[1].0) {
            return Err(Error::OverlappingSpans {
                a_start: w[0].0.start,
                a_end: w[0].0.end,
                b_start: w[1].0.start,
                b_end: w[1].0.end,
            });
        }
    }
    for &&(span, ty) in &sorted {
        assert!(
            span.end <= len && !span.is_empty(),
            "span {span:?} out of range"
        );
        tags[span.start] = BioTag::B(ty);
        for t in &mut tags[span.start + 1..span.end] {
            *t = BioTag::I(ty);
        }
    }
    Ok(tags)
}

/// Per-token tags for every text node of `doc`.
pub fn bio_encode(doc: &Document) -> Result<Vec<BioTag>> {
    let spans: Vec<(Span, NodeType)> = doc.nodes.iter().map(|n| (n.span, n.node_type)).collect();
    encode_spans(doc.tokens.len(), &spans)
}

/// Typed spans from a tag sequence. An `I-X` without a preceding `B-X`/`I-X`
/// opens a new span as if it were `B-X`.
pub fn bio_decode(tags: &[BioTag]) -> Vec<(Span, NodeType)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, NodeType)> = None;
    for (i, &tag) in tags.iter().enumerate() {
        match tag {
            BioTag::O => {
                if let Some((s, t)) = open.take() {
                    out.push((Span::new(s, i), t));
                }
            }
            BioTag::B(t) => {
                if let Some((s, pt)) = open.take() {
                    out.push((Span::new(s, i), pt));
                }
                open = Some((i, t));
            }
            BioTag::I(t) => match open {
                Some((_, pt)) if pt == t => {}
                _ => {
                    if let Some((s, pt)) = open.take() {
                        out.push((Span::new(s, i), pt));
                    }
                    open = Some((i, t));
                }
            },
        }
    }
    if let Some((s, t)) = open {
        out.push((Span::new(s, tags.len()), t));
    }
    out
}
