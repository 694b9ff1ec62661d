//! Synthetic corpora with a planted lexical signal.
//!
//! Every node span ends in a trigger word drawn from a small per-type pool,
//! optionally preceded by a relation cue (one pool per relation), an anchor
//! cue naming the meta parent when the node attaches to a meta node outside
//! the chain, and a modifier. Parents follow the chain rule of
//! [`chain_parent`](super::chain_parent) with probability `p_chain`; all
//! other nodes attach to a meta node, so gold parents always precede their
//! child and lie inside any candidate window.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    chain_parent, Document, Domain, Edge, Kind, MetaNode, Node, NodeId, NodeRef, NodeType,
    Relation, Span, Token,
};
use crate::error::{Error, Result};

/// Relation distributions for one domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationProfile {
    pub domain: Domain,
    /// Relation weights for event children (`DependOn` is ignored).
    pub event_relations: Vec<(Relation, f64)>,
    /// Relation weights for time-expression children.
    pub time_relations: Vec<(Relation, f64)>,
    /// Multiplier on the relation a node type prefers (`Overlap` for
    /// stative events, `Before` for the other events, `DependOn` for time).
    pub type_relation_bias: f64,
}

impl RelationProfile {
    /// Overlap-heavy.
    pub fn news() -> Self {
        RelationProfile {
            domain: Domain::News,
            event_relations: vec![
                (Relation::Overlap, 0.6),
                (Relation::Before, 0.15),
                (Relation::Includes, 0.15),
                (Relation::After, 0.1),
            ],
            time_relations: vec![
                (Relation::DependOn, 0.6),
                (Relation::Overlap, 0.2),
                (Relation::Includes, 0.2),
            ],
            type_relation_bias: 2.0,
        }
    }

    /// Before-heavy.
    pub fn grimm() -> Self {
        RelationProfile {
            domain: Domain::Grimm,
            event_relations: vec![
                (Relation::Before, 0.5),
                (Relation::Overlap, 0.4),
                (Relation::Includes, 0.05),
                (Relation::After, 0.05),
            ],
            time_relations: vec![
                (Relation::DependOn, 0.5),
                (Relation::Includes, 0.3),
                (Relation::Overlap, 0.2),
            ],
            type_relation_bias: 2.0,
        }
    }

    /// Every edge carries `rel` (which must not be `DependOn`).
    pub fn single(domain: Domain, rel: Relation) -> Self {
        RelationProfile {
            domain,
            event_relations: vec![(rel, 1.0)],
            time_relations: vec![(rel, 1.0)],
            type_relation_bias: 1.0,
        }
    }

    pub fn for_domain(domain: Domain) -> Self {
        match domain {
            Domain::News => Self::news(),
            Domain::Grimm => Self::grimm(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub docs: usize,
    /// Inclusive range of sentences per document.
    pub sentences: (usize, usize),
    /// Inclusive range of nodes per sentence.
    pub nodes_per_sentence: (usize, usize),
    /// Number of distinct filler words.
    pub vocab_size: usize,
    /// Probability that a node attaches to its chain parent.
    pub p_chain: f64,
    pub profile: RelationProfile,
    /// Probability that a node is a time expression.
    pub p_time: f64,
    pub time_types: Vec<(NodeType, f64)>,
    pub event_types: Vec<(NodeType, f64)>,
    /// Probability that each planted cue word is emitted.
    pub cue_rate: f64,
    /// Probability that a node span is wrapped in quotation marks.
    pub p_quote: f64,
    /// Trigger words per node type.
    pub triggers_per_type: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            docs: 10,
            sentences: (3, 6),
            nodes_per_sentence: (1, 3),
            vocab_size: 200,
            p_chain: 0.7,
            profile: RelationProfile::news(),
            p_time: 0.2,
            time_types: vec![
                (NodeType::VagueTime, 0.3),
                (NodeType::AbsoluteConcrete, 0.4),
                (NodeType::RelativeConcrete, 0.3),
            ],
            event_types: vec![
                (NodeType::Event, 0.4),
                (NodeType::State, 0.25),
                (NodeType::CompletedEvent, 0.1),
                (NodeType::ModalizedEvent, 0.08),
                (NodeType::OngoingEvent, 0.05),
                (NodeType::Habitual, 0.04),
                (NodeType::GenericHabitual, 0.04),
                (NodeType::GenericState, 0.04),
            ],
            cue_rate: 1.0,
            p_quote: 0.1,
            triggers_per_type: 3,
        }
    }
}

/// Meta parents for non-chain attachments with their sampling weights.
const META_WEIGHTS: [(MetaNode, f64); 5] = [
    (MetaNode::Root, 0.1),
    (MetaNode::PastRef, 0.2),
    (MetaNode::PresentRef, 0.2),
    (MetaNode::FutureRef, 0.1),
    (MetaNode::Dct, 0.4),
];

const CUE_VARIANTS: usize = 2;

impl SynthParams {
    fn check(&self) -> Result<()> {
        let probs = [
            ("p_chain", self.p_chain),
            ("p_time", self.p_time),
            ("cue_rate", self.cue_rate),
            ("p_quote", self.p_quote),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        let ranges = [
            ("sentences", self.sentences),
            ("nodes_per_sentence", self.nodes_per_sentence),
        ];
        for (name, (lo, hi)) in ranges {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("{name} range ({lo}, {hi}) is empty")));
            }
        }
        if self.vocab_size == 0 || self.triggers_per_type == 0 {
            return Err(Error::Config("vocabulary sizes must be positive".into()));
        }
        let check_weights = |name: &str, w: &[f64]| -> Result<()> {
            if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Config(format!("{name} weights are invalid")));
            }
            Ok(())
        };
        check_weights(
            "time type",
            &self.time_types.iter().map(|p| p.1).collect::<Vec<_>>(),
        )?;
        check_weights(
            "event type",
            &self.event_types.iter().map(|p| p.1).collect::<Vec<_>>(),
        )?;
        if self.time_types.iter().any(|(t, _)| t.kind() != Kind::Time)
            || self
                .event_types
                .iter()
                .any(|(t, _)| t.kind() != Kind::Event)
        {
            return Err(Error::Config(
                "type weights list a type of the wrong kind".into(),
            ));
        }
        let ev: Vec<f64> = self
            .profile
            .event_relations
            .iter()
            .map(|&(r, w)| if r == Relation::DependOn { 0.0 } else { w })
            .collect();
        check_weights("event relation", &ev)?;
        check_weights(
            "time relation",
            &self
                .profile
                .time_relations
                .iter()
                .map(|p| p.1)
                .collect::<Vec<_>>(),
        )?;
        if self.profile.type_relation_bias.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Config("type_relation_bias must be positive".into()));
        }
        Ok(())
    }
}

fn sample<T: Copy, R: Rng>(rng: &mut R, items: &[(T, f64)]) -> T {
    let dist = WeightedIndex::new(items.iter().map(|p| p.1)).expect("validated weights");
    items[dist.sample(rng)].0
}

fn preferred_relation(ty: NodeType) -> Relation {
    match ty.kind() {
        Kind::Time => Relation::DependOn,
        _ if ty.is_stative() || ty == NodeType::OngoingEvent => Relation::Overlap,
        _ => Relation::Before,
    }
}

fn trigger_pos(ty: NodeType) -> &'static str {
    match ty.kind() {
        Kind::Time => "NT",
        _ if ty.is_stative() => "VA",
        _ => "VV",
    }
}

fn meta_label(m: MetaNode) -> &'static str {
    m.node_type().name()
}

struct DocBuilder<'a, R> {
    params: &'a SynthParams,
    rng: &'a mut R,
    tokens: Vec<Token>,
    sentences: Vec<Span>,
    nodes: Vec<Node>,
    parents: Vec<(NodeRef, Relation)>,
}

impl<R: Rng> DocBuilder<'_, R> {
    fn push(&mut self, form: String, pos: &str) {
        self.tokens.push(Token::new(form, pos));
    }

    fn filler(&mut self, count: usize) {
        for _ in 0..count {
            let w = self.rng.gen_range(0..self.params.vocab_size);
            self.push(format!("w{w}"), "NN");
        }
    }

    fn cue(&mut self) -> bool {
        self.rng.gen_bool(self.params.cue_rate)
    }

    fn node(&mut self, sent: usize) {
        let p = self.params;
        let ty = if self.rng.gen_bool(p.p_time) {
            sample(self.rng, &p.time_types)
        } else {
            sample(self.rng, &p.event_types)
        };
        let idx = self.nodes.len();
        // Placeholder node so chain_parent can inspect the kind.
        self.nodes.push(Node {
            id: NodeId(idx as i64),
            span: Span::new(0, 1),
            node_type: ty,
            sent,
        });

        let chain = chain_parent(&self.nodes, idx);
        let parent = if self.rng.gen_bool(p.p_chain) {
            chain
        } else {
            let options: Vec<(MetaNode, f64)> = META_WEIGHTS
                .iter()
                .copied()
                .filter(|&(m, _)| NodeRef::Meta(m) != chain)
                .collect();
            NodeRef::Meta(sample(self.rng, &options))
        };

        let base = if ty.kind() == Kind::Time {
            &p.profile.time_relations
        } else {
            &p.profile.event_relations
        };
        let pref = preferred_relation(ty);
        let weighted: Vec<(Relation, f64)> = base
            .iter()
            .filter(|(r, _)| r.allowed_for(ty.kind()))
            .map(|&(r, w)| {
                (
                    r,
                    if r == pref {
                        w * p.profile.type_relation_bias
                    } else {
                        w
                    },
                )
            })
            .collect();
        let relation = sample(self.rng, &weighted);

        let quoted = self.rng.gen_bool(p.p_quote);
        if quoted {
            self.push("\"".into(), "PU");
        }
        let start = self.tokens.len();
        if self.cue() {
            let k = self.rng.gen_range(0..CUE_VARIANTS);
            self.push(format!("rel_{}_{k}", relation.name()), "AD");
        }
        let chained = parent == chain;
        if let (NodeRef::Meta(m), false) = (parent, chained) {
            if self.cue() {
                let k = self.rng.gen_range(0..CUE_VARIANTS);
                self.push(format!("anchor_{}_{k}", meta_label(m)), "P");
            }
        }
        if self.rng.gen_bool(0.3) {
            let k = self.rng.gen_range(0..4);
            self.push(format!("mod{k}"), "JJ");
        }
        let k = self.rng.gen_range(0..p.triggers_per_type);
        self.push(format!("{}_{k}", ty.name()), trigger_pos(ty));
        let end = self.tokens.len();
        if quoted {
            self.push("\"".into(), "PU");
        }
        self.nodes[idx].span = Span::new(start, end);
        self.parents.push((parent, relation));
    }
}

/// Generates `params.docs` documents deterministically from `seed`.
pub fn generate_synthetic(params: &SynthParams, seed: u64) -> Result<Vec<Document>> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(params.docs);
    for d in 0..params.docs {
        let mut b = DocBuilder {
            params,
            rng: &mut rng,
            tokens: Vec::new(),
            sentences: Vec::new(),
            nodes: Vec::new(),
            parents: Vec::new(),
        };
        let n_sent = b.rng.gen_range(params.sentences.0..=params.sentences.1);
        for s in 0..n_sent {
            let start = b.tokens.len();
            let k = b
                .rng
                .gen_range(params.nodes_per_sentence.0..=params.nodes_per_sentence.1);
            for _ in 0..k {
                let gap = b.rng.gen_range(0..3);
                b.filler(gap);
                b.node(s);
            }
            let tail = b.rng.gen_range(0..2);
            b.filler(tail);
            b.push(".".into(), "PU");
            b.sentences.push(Span::new(start, b.tokens.len()));
        }
        let DocBuilder {
            tokens,
            sentences,
            nodes,
            parents,
            ..
        } = b;
        let edges = parents
            .iter()
            .enumerate()
            .map(|(i, &(p, relation))| Edge {
                child: NodeId(i as i64),
                parent: match p {
                    NodeRef::Meta(m) => m.id(),
                    NodeRef::Text(j) => NodeId(j as i64),
                },
                relation,
            })
            .collect();
        let doc = Document {
            id: format!("synth-{seed}-{d:04}"),
            tokens,
            sentences,
            nodes,
            edges,
            dct: Some(format!("2018-01-{:02}", d % 28 + 1)),
            domain: Some(params.profile.domain),
        };
        doc.validate()?;
        docs.push(doc);
    }
    Ok(docs)
}
