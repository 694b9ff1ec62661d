use super::{Document, Edge, Kind, NodeRef, Relation};
use crate::error::{Error, Result};

/// Parent and relation for every text node of one document. Meta nodes hang
/// off an implicit virtual root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemporalTree {
    parents: Vec<(NodeRef, Relation)>,
}

impl TemporalTree {
    /// Wraps a parent assignment without checking it; see [`TemporalTree::check`].
    pub fn new(parents: Vec<(NodeRef, Relation)>) -> Self {
        TemporalTree { parents }
    }

    pub fn from_document(doc: &Document) -> Result<Self> {
        let mut parents: Vec<Option<(NodeRef, Relation)>> = vec![None; doc.nodes.len()];
        for e in &doc.edges {
            let child = match doc.resolve(e.child) {
                Some(NodeRef::Text(i)) => i,
                Some(NodeRef::Meta(_)) => {
                    return Err(Error::invalid(
                        &doc.id,
                        format!("edge child {} is a meta node", e.child),
                    ))
                }
                None => {
                    return Err(Error::UnknownNode {
                        doc: doc.id.clone(),
                        id: e.child,
                    })
                }
            };
            let parent = doc.resolve(e.parent).ok_or_else(|| Error::UnknownNode {
                doc: doc.id.clone(),
                id: e.parent,
            })?;
            if parents[child].replace((parent, e.relation)).is_some() {
                return Err(Error::invalid(
                    &doc.id,
                    format!("node {} has more than one parent", e.child),
                ));
            }
        }
        let parents = parents
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                p.ok_or_else(|| {
                    Error::invalid(&doc.id, format!("node {} has no parent", doc.nodes[i].id))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let tree = TemporalTree { parents };
        tree.check(doc)?;
        Ok(tree)
    }

    /// Verifies single parents, acyclicity and the node-kind constraints.
    pub fn check(&self, doc: &Document) -> Result<()> {
        if self.parents.len() != doc.nodes.len() {
            return Err(Error::invalid(
                &doc.id,
                format!(
                    "tree covers {} nodes, document has {}",
                    self.parents.len(),
                    doc.nodes.len()
                ),
            ));
        }
        for (i, &(parent, rel)) in self.parents.iter().enumerate() {
            let node = &doc.nodes[i];
            if let NodeRef::Text(p) = parent {
                if p == i {
                    return Err(Error::invalid(
                        &doc.id,
                        format!("node {} is its own parent", node.id),
                    ));
                }
                if p >= doc.nodes.len() {
                    return Err(Error::invalid(
                        &doc.id,
                        format!("parent index {p} out of range"),
                    ));
                }
            }
            if !rel.allowed_for(node.kind()) {
                return Err(Error::invalid(
                    &doc.id,
                    format!("{rel} edge on non-time child {}", node.id),
                ));
            }
            if node.kind() == Kind::Time && doc.ref_kind(parent) == Kind::Event {
                return Err(Error::invalid(
                    &doc.id,
                    format!("time expression {} attached to an event", node.id),
                ));
            }
        }
        // Walking up from any node must reach a meta node within n steps.
        for start in 0..self.parents.len() {
            let mut cur = start;
            let mut steps = 0;
            while let NodeRef::Text(p) = self.parents[cur].0 {
                cur = p;
                steps += 1;
                if steps > self.parents.len() {
                    return Err(Error::invalid(
                        &doc.id,
                        format!("cycle through node {}", doc.nodes[start].id),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parent(&self, child: usize) -> NodeRef {
        self.parents[child].0
    }

    pub fn relation(&self, child: usize) -> Relation {
        self.parents[child].1
    }

    pub fn entries(&self) -> &[(NodeRef, Relation)] {
        &self.parents
    }

    /// Whether `ancestor` lies on the path from `node` up to the meta layer.
    pub fn is_ancestor(&self, ancestor: usize, node: usize) -> bool {
        let mut cur = node;
        for _ in 0..=self.parents.len() {
            match self.parents[cur].0 {
                NodeRef::Text(p) if p == ancestor => return true,
                NodeRef::Text(p) => cur = p,
                NodeRef::Meta(_) => return false,
            }
        }
        false
    }

    pub fn to_edges(&self, doc: &Document) -> Vec<Edge> {
        self.parents
            .iter()
            .enumerate()
            .map(|(i, &(p, relation))| Edge {
                child: doc.nodes[i].id,
                parent: doc.ref_id(p),
                relation,
            })
            .collect()
    }
}
