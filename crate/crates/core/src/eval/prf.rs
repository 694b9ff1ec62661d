use std::collections::{BTreeMap, HashSet};

use serde::{Serialize, Serializer};

use crate::corpus::{Document, Kind, NodeRef, Relation, Span};

/// Micro-averaged precision/recall/F1 with the raw counts behind them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Prf {
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Prf {
    pub fn new(correct: usize, predicted: usize, gold: usize) -> Self {
        assert!(
            correct <= predicted && correct <= gold,
            "inconsistent counts"
        );
        Prf {
            correct,
            predicted,
            gold,
        }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.predicted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.gold)
    }

    /// `2pr / (p + r)`, zero when both are zero.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn merge(&mut self, other: Prf) {
        self.correct += other.correct;
        self.predicted += other.predicted;
        self.gold += other.gold;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Serialize for Prf {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Prf", 6)?;
        st.serialize_field("precision", &self.precision())?;
        st.serialize_field("recall", &self.recall())?;
        st.serialize_field("f1", &self.f1())?;
        st.serialize_field("correct", &self.correct)?;
        st.serialize_field("predicted", &self.predicted)?;
        st.serialize_field("gold", &self.gold)?;
        st.end()
    }
}

/// How span labels are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanMode {
    /// Span and fine-grained type must both match.
    Exact,
    /// Types collapsed to time / event.
    Binary,
    /// Labels ignored.
    AllSpan,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpanScores {
    pub overall: Prf,
    pub by_label: BTreeMap<String, Prf>,
}

fn span_label(doc: &Document, i: usize, mode: SpanMode) -> String {
    let t = doc.nodes[i].node_type;
    match mode {
        SpanMode::Exact => t.name().to_string(),
        SpanMode::Binary => match t.kind() {
            Kind::Time => "time".into(),
            _ => "event".into(),
        },
        SpanMode::AllSpan => "span".into(),
    }
}

/// Exact-match span scoring over aligned `(gold, predicted)` document pairs.
pub fn span_prf(pairs: &[(&Document, &Document)], mode: SpanMode) -> SpanScores {
    let mut by_label: BTreeMap<String, Prf> = BTreeMap::new();
    for &(gold, pred) in pairs {
        let g: HashSet<(Span, String)> = (0..gold.nodes.len())
            .map(|i| (gold.nodes[i].span, span_label(gold, i, mode)))
            .collect();
        let p: HashSet<(Span, String)> = (0..pred.nodes.len())
            .map(|i| (pred.nodes[i].span, span_label(pred, i, mode)))
            .collect();
        for item in &g {
            by_label.entry(item.1.clone()).or_default().gold += 1;
        }
        for item in &p {
            let e = by_label.entry(item.1.clone()).or_default();
            e.predicted += 1;
            if g.contains(item) {
                e.correct += 1;
            }
        }
    }
    let mut overall = Prf::default();
    for v in by_label.values() {
        overall.merge(*v);
    }
    SpanScores { overall, by_label }
}

/// Span-keyed identity of a tree node, stable across gold and predicted
/// node sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    Meta(i64),
    Span(usize, usize),
}

pub fn node_key(doc: &Document, r: NodeRef) -> NodeKey {
    match r {
        NodeRef::Meta(m) => NodeKey::Meta(m.id().0),
        NodeRef::Text(i) => NodeKey::Span(doc.nodes[i].span.start, doc.nodes[i].span.end),
    }
}

/// `(child, parent, relation)` keyed by spans for every edge of `doc`.
pub(crate) fn keyed_edges(doc: &Document) -> Vec<(NodeKey, NodeKey, Relation)> {
    doc.edges
        .iter()
        .filter_map(|e| {
            let c = doc.resolve(e.child)?;
            let p = doc.resolve(e.parent)?;
            Some((node_key(doc, c), node_key(doc, p), e.relation))
        })
        .collect()
}

/// Attachment scoring on `<child, parent>` tuples, or
/// `<child, relation, parent>` triples when `labeled`.
pub fn attachment_prf(pairs: &[(&Document, &Document)], labeled: bool) -> Prf {
    let mut total = Prf::default();
    for &(gold, pred) in pairs {
        let project = |doc: &Document| -> HashSet<(NodeKey, NodeKey, Option<Relation>)> {
            keyed_edges(doc)
                .into_iter()
                .map(|(c, p, r)| (c, p, labeled.then_some(r)))
                .collect()
        };
        let g = project(gold);
        let p = project(pred);
        total.merge(Prf::new(g.intersection(&p).count(), p.len(), g.len()));
    }
    total
}
