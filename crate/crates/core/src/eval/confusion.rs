use std::collections::HashMap;

use serde::Serialize;

use super::prf::{keyed_edges, NodeKey};
use crate::corpus::{Document, Kind, NodeRef, Relation};

/// Count grid with labelled axes: rows gold, columns predicted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn add(&mut self, gold: usize, pred: usize) {
        self.counts[gold][pred] += 1;
    }

    pub fn get(&self, gold: usize, pred: usize) -> usize {
        self.counts[gold][pred]
    }

    pub fn row_totals(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<usize> {
        (0..self.labels.len())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    pub fn total(&self) -> usize {
        self.row_totals().iter().sum()
    }

    pub fn to_table(&self, title: &str) -> String {
        let w = self
            .labels
            .iter()
            .map(String::len)
            .chain([title.len(), 5])
            .max()
            .unwrap_or(5)
            + 2;
        let mut out = format!("{title:<w$}");
        for l in &self.labels {
            out.push_str(&format!("{l:>w$}"));
        }
        out.push_str(&format!("{:>w$}\n", "total"));
        for (i, row) in self.counts.iter().enumerate() {
            out.push_str(&format!("{:<w$}", self.labels[i]));
            for c in row {
                out.push_str(&format!("{c:>w$}"));
            }
            out.push_str(&format!("{:>w$}\n", row.iter().sum::<usize>()));
        }
        out.push_str(&format!("{:<w$}", "total"));
        for c in self.col_totals() {
            out.push_str(&format!("{c:>w$}"));
        }
        out.push_str(&format!("{:>w$}\n", self.total()));
        out
    }
}

/// Pre/far parent confusion over event children present (by span) in both
/// the gold and the predicted documents.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityConfusion {
    pub matrix: ConfusionMatrix,
    /// Event children in the gold documents.
    pub gold_children: usize,
    /// Of those, how many were matched in the prediction and evaluated.
    pub evaluated: usize,
}

impl LocalityConfusion {
    pub fn coverage(&self) -> f64 {
        if self.gold_children == 0 {
            1.0
        } else {
            self.evaluated as f64 / self.gold_children as f64
        }
    }
}

const PRE: usize = 0;
const FAR: usize = 1;

fn locality(doc: &Document, child: usize) -> Option<usize> {
    let e = doc.edges.iter().find(|e| e.child == doc.nodes[child].id)?;
    let parent = doc.resolve(e.parent)?;
    Some(if child > 0 && parent == NodeRef::Text(child - 1) {
        PRE
    } else {
        FAR
    })
}

/// Rows: gold parent position; columns: predicted parent position. "pre" is
/// the immediately preceding node, "far" anything else.
pub fn parent_locality_confusion(pairs: &[(&Document, &Document)]) -> LocalityConfusion {
    let mut matrix = ConfusionMatrix::new(vec!["pre".into(), "far".into()]);
    let (mut gold_children, mut evaluated) = (0, 0);
    for &(gold, pred) in pairs {
        let pred_by_span: HashMap<_, usize> = pred
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.span, i))
            .collect();
        for (i, node) in gold.nodes.iter().enumerate() {
            if node.kind() != Kind::Event {
                continue;
            }
            gold_children += 1;
            let Some(g) = locality(gold, i) else { continue };
            let Some(&j) = pred_by_span.get(&node.span) else {
                continue;
            };
            let Some(p) = locality(pred, j) else { continue };
            matrix.add(g, p);
            evaluated += 1;
        }
    }
    LocalityConfusion {
        matrix,
        gold_children,
        evaluated,
    }
}

/// Relation confusion restricted to children whose parent was recovered.
pub fn relation_confusion(pairs: &[(&Document, &Document)]) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::new(Relation::ALL.iter().map(|r| r.name().to_string()).collect());
    for &(gold, pred) in pairs {
        let pred_edges: HashMap<NodeKey, (NodeKey, Relation)> = keyed_edges(pred)
            .into_iter()
            .map(|(c, p, r)| (c, (p, r)))
            .collect();
        for (c, p, r) in keyed_edges(gold) {
            if let Some(&(pp, pr)) = pred_edges.get(&c) {
                if pp == p {
                    m.add(r.index(), pr.index());
                }
            }
        }
    }
    m
}
