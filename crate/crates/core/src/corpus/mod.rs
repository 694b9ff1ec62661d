//! Documents, node and relation taxonomies, temporal trees, file I/O, BIO
//! conversion, splitting, and the synthetic corpus generator.

mod bio;
mod io;
mod split;
mod synth;
mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use bio::{bio_decode, bio_encode, encode_spans, BioTag, NUM_BIO_TAGS};
pub use io::{parse_documents, read_documents, to_jsonl, write_documents};
pub use split::{kfold, split_corpus, Split};
pub use synth::{generate_synthetic, RelationProfile, SynthParams};
pub use tree::TemporalTree;

use crate::error::{Error, Result};

/// Node identifier as written in corpus files. Text nodes use non-negative
/// ordinals; meta nodes use the reserved ids of [`MetaNode`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub i64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Meta,
    Time,
    Event,
}

/// Fine-grained node type. The first five are meta nodes, then three time
/// expression classes, then eight event classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeType {
    #[serde(rename = "root")]
    Root,
    #[serde(rename = "past-ref")]
    PastRef,
    #[serde(rename = "present-ref")]
    PresentRef,
    #[serde(rename = "future-ref")]
    FutureRef,
    #[serde(rename = "dct")]
    Dct,
    #[serde(rename = "vague-time")]
    VagueTime,
    #[serde(rename = "absolute-concrete")]
    AbsoluteConcrete,
    #[serde(rename = "relative-concrete")]
    RelativeConcrete,
    #[serde(rename = "event")]
    Event,
    #[serde(rename = "state")]
    State,
    #[serde(rename = "habitual")]
    Habitual,
    #[serde(rename = "completed-event")]
    CompletedEvent,
    #[serde(rename = "ongoing-event")]
    OngoingEvent,
    #[serde(rename = "modalized-event")]
    ModalizedEvent,
    #[serde(rename = "generic-habitual")]
    GenericHabitual,
    #[serde(rename = "generic-state")]
    GenericState,
}

impl NodeType {
    pub const ALL: [NodeType; 16] = [
        NodeType::Root,
        NodeType::PastRef,
        NodeType::PresentRef,
        NodeType::FutureRef,
        NodeType::Dct,
        NodeType::VagueTime,
        NodeType::AbsoluteConcrete,
        NodeType::RelativeConcrete,
        NodeType::Event,
        NodeType::State,
        NodeType::Habitual,
        NodeType::CompletedEvent,
        NodeType::OngoingEvent,
        NodeType::ModalizedEvent,
        NodeType::GenericHabitual,
        NodeType::GenericState,
    ];

    /// The eleven types a text span can carry (the BIO tag inventory).
    pub const TEXT: [NodeType; 11] = [
        NodeType::VagueTime,
        NodeType::AbsoluteConcrete,
        NodeType::RelativeConcrete,
        NodeType::Event,
        NodeType::State,
        NodeType::Habitual,
        NodeType::CompletedEvent,
        NodeType::OngoingEvent,
        NodeType::ModalizedEvent,
        NodeType::GenericHabitual,
        NodeType::GenericState,
    ];

    pub const TIME: [NodeType; 3] = [
        NodeType::VagueTime,
        NodeType::AbsoluteConcrete,
        NodeType::RelativeConcrete,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn kind(self) -> Kind {
        match self.index() {
            0..=4 => Kind::Meta,
            5..=7 => Kind::Time,
            _ => Kind::Event,
        }
    }

    /// Position within [`NodeType::TEXT`]; `None` for meta types.
    pub fn text_index(self) -> Option<usize> {
        self.index().checked_sub(5)
    }

    pub fn is_stative(self) -> bool {
        matches!(self, NodeType::State | NodeType::GenericState)
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeType::Root => "root",
            NodeType::PastRef => "past-ref",
            NodeType::PresentRef => "present-ref",
            NodeType::FutureRef => "future-ref",
            NodeType::Dct => "dct",
            NodeType::VagueTime => "vague-time",
            NodeType::AbsoluteConcrete => "absolute-concrete",
            NodeType::RelativeConcrete => "relative-concrete",
            NodeType::Event => "event",
            NodeType::State => "state",
            NodeType::Habitual => "habitual",
            NodeType::CompletedEvent => "completed-event",
            NodeType::OngoingEvent => "ongoing-event",
            NodeType::ModalizedEvent => "modalized-event",
            NodeType::GenericHabitual => "generic-habitual",
            NodeType::GenericState => "generic-state",
        }
    }

    pub fn from_name(name: &str) -> Option<NodeType> {
        NodeType::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pre-defined reference nodes at the top of every tree, in candidate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetaNode {
    Root,
    PastRef,
    PresentRef,
    FutureRef,
    Dct,
}

impl MetaNode {
    pub const ALL: [MetaNode; 5] = [
        MetaNode::Root,
        MetaNode::PastRef,
        MetaNode::PresentRef,
        MetaNode::FutureRef,
        MetaNode::Dct,
    ];

    pub fn id(self) -> NodeId {
        NodeId(self.index() as i64 - 5)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_id(id: NodeId) -> Option<MetaNode> {
        MetaNode::ALL.into_iter().find(|m| m.id() == id)
    }

    pub fn node_type(self) -> NodeType {
        NodeType::ALL[self.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "before")]
    Before,
    #[serde(rename = "after")]
    After,
    #[serde(rename = "overlap")]
    Overlap,
    #[serde(rename = "includes")]
    Includes,
    #[serde(rename = "depend-on")]
    DependOn,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::Before,
        Relation::After,
        Relation::Overlap,
        Relation::Includes,
        Relation::DependOn,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::Before => "before",
            Relation::After => "after",
            Relation::Overlap => "overlap",
            Relation::Includes => "includes",
            Relation::DependOn => "depend-on",
        }
    }

    pub fn from_name(name: &str) -> Option<Relation> {
        Relation::ALL.into_iter().find(|r| r.name() == name)
    }

    /// Whether a child of `kind` may carry this relation.
    pub fn allowed_for(self, kind: Kind) -> bool {
        self != Relation::DependOn || kind == Kind::Time
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Text domain; selects the most common relation used by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    News,
    Grimm,
}

impl Domain {
    pub fn default_relation(self) -> Relation {
        match self {
            Domain::News => Relation::Overlap,
            Domain::Grimm => Relation::Before,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::News => "news",
            Domain::Grimm => "grimm",
        }
    }

    pub fn from_name(name: &str) -> Option<Domain> {
        match name {
            "news" => Some(Domain::News),
            "grimm" => Some(Domain::Grimm),
            _ => None,
        }
    }
}

/// Half-open token range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn overlap_len(&self, other: &Span) -> usize {
        self.end
            .min(other.end)
            .saturating_sub(self.start.max(other.start))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    pub pos: String,
}

impl Token {
    pub fn new(form: impl Into<String>, pos: impl Into<String>) -> Self {
        Token {
            form: form.into(),
            pos: pos.into(),
        }
    }
}

/// A time expression or event anchored to a token span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub span: Span,
    pub node_type: NodeType,
    /// Index of the containing sentence.
    pub sent: usize,
}

impl Node {
    pub fn kind(&self) -> Kind {
        self.node_type.kind()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub child: NodeId,
    pub parent: NodeId,
    pub relation: Relation,
}

/// Reference to a tree node inside one document: a meta node or the index of
/// a text node in `Document::nodes`. Ordering matches candidate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Meta(MetaNode),
    Text(usize),
}

impl NodeRef {
    pub fn is_meta(self) -> bool {
        matches!(self, NodeRef::Meta(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<Token>,
    pub sentences: Vec<Span>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub dct: Option<String>,
    pub domain: Option<Domain>,
}

impl Document {
    /// A document with tokens and sentence spans but no annotation.
    pub fn new(id: impl Into<String>, tokens: Vec<Token>, sentences: Vec<Span>) -> Self {
        Document {
            id: id.into(),
            tokens,
            sentences,
            nodes: Vec::new(),
            edges: Vec::new(),
            dct: None,
            domain: None,
        }
    }

    pub fn sentence_of(&self, token: usize) -> Option<usize> {
        let idx = self.sentences.partition_point(|s| s.end <= token);
        (idx < self.sentences.len() && self.sentences[idx].start <= token).then_some(idx)
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn resolve(&self, id: NodeId) -> Option<NodeRef> {
        if id.0 < 0 {
            MetaNode::from_id(id).map(NodeRef::Meta)
        } else {
            self.node_index(id).map(NodeRef::Text)
        }
    }

    pub fn ref_id(&self, r: NodeRef) -> NodeId {
        match r {
            NodeRef::Meta(m) => m.id(),
            NodeRef::Text(i) => self.nodes[i].id,
        }
    }

    pub fn ref_type(&self, r: NodeRef) -> NodeType {
        match r {
            NodeRef::Meta(m) => m.node_type(),
            NodeRef::Text(i) => self.nodes[i].node_type,
        }
    }

    pub fn ref_kind(&self, r: NodeRef) -> Kind {
        self.ref_type(r).kind()
    }

    /// Adds text nodes for `(span, type)` pairs, numbering them `0..` in
    /// textual order and deriving sentence ids. Replaces existing nodes and
    /// clears edges.
    pub fn set_nodes(&mut self, mut spans: Vec<(Span, NodeType)>) -> Result<()> {
        spans.sort_by_key(|(s, _)| (s.start, s.end));
        let mut nodes = Vec::with_capacity(spans.len());
        for (i, (span, ty)) in spans.into_iter().enumerate() {
            let sent = self.sentence_of(span.start).ok_or_else(|| {
                Error::invalid(&self.id, format!("span {span:?} outside token range"))
            })?;
            nodes.push(Node {
                id: NodeId(i as i64),
                span,
                node_type: ty,
                sent,
            });
        }
        self.nodes = nodes;
        self.edges.clear();
        self.validate()
    }

    /// Whether the document carries a complete gold tree.
    pub fn has_tree(&self) -> bool {
        !self.nodes.is_empty() && !self.edges.is_empty()
    }

    /// Checks every structural invariant: sentence partition, node ordering
    /// and placement, and (when edges are present) tree validity.
    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        let mut expect = 0;
        for s in &self.sentences {
            if s.start != expect || s.is_empty() {
                return Err(Error::invalid(
                    &self.id,
                    format!("sentence spans do not partition the tokens at {s:?}"),
                ));
            }
            expect = s.end;
        }
        if expect != n {
            return Err(Error::invalid(
                &self.id,
                format!("sentence spans cover {expect} of {n} tokens"),
            ));
        }

        let mut prev: Option<&Node> = None;
        for node in &self.nodes {
            if node.kind() == Kind::Meta {
                return Err(Error::invalid(
                    &self.id,
                    format!("node {} has meta type {}", node.id, node.node_type),
                ));
            }
            if node.id.0 < 0 {
                return Err(Error::invalid(
                    &self.id,
                    format!("text node id {} is negative", node.id),
                ));
            }
            if node.span.is_empty() || node.span.end > n {
                return Err(Error::invalid(
                    &self.id,
                    format!("node {} has invalid span {:?}", node.id, node.span),
                ));
            }
            let sent = self.sentence_of(node.span.start);
            if sent != Some(node.sent) || self.sentences[node.sent].end < node.span.end {
                return Err(Error::invalid(
                    &self.id,
                    format!("node {} crosses or misstates its sentence", node.id),
                ));
            }
            if let Some(p) = prev {
                if node.id <= p.id {
                    return Err(Error::invalid(
                        &self.id,
                        format!("node ids not increasing at {}", node.id),
                    ));
                }
                if node.span.start < p.span.end {
                    return Err(Error::OverlappingSpans {
                        a_start: p.span.start,
                        a_end: p.span.end,
                        b_start: node.span.start,
                        b_end: node.span.end,
                    });
                }
            }
            prev = Some(node);
        }

        if !self.edges.is_empty() {
            TemporalTree::from_document(self)?;
        }
        Ok(())
    }
}

/// The immediately preceding node a child may legally attach to: the
/// previous node for events, the previous time expression for time
/// expressions, and DCT when there is none.
pub fn chain_parent(nodes: &[Node], child: usize) -> NodeRef {
    let want_time = nodes[child].kind() == Kind::Time;
    (0..child)
        .rev()
        .find(|&j| !want_time || nodes[j].kind() == Kind::Time)
        .map_or(NodeRef::Meta(MetaNode::Dct), NodeRef::Text)
}
