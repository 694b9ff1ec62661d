//! JSON Lines document files: one object per line, meta nodes implicit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Document, Domain, Edge, Kind, Node, NodeId, NodeType, Relation, Span, Token};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    id: String,
    tokens: Vec<(String, String)>,
    sentences: Vec<(usize, usize)>,
    #[serde(default)]
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dct: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Domain>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: i64,
    span: (usize, usize),
    kind: Kind,
    subtype: NodeType,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    child: i64,
    parent: i64,
    relation: Relation,
}

impl From<&Document> for DocumentRecord {
    fn from(d: &Document) -> Self {
        DocumentRecord {
            id: d.id.clone(),
            tokens: d
                .tokens
                .iter()
                .map(|t| (t.form.clone(), t.pos.clone()))
                .collect(),
            sentences: d.sentences.iter().map(|s| (s.start, s.end)).collect(),
            nodes: d
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id.0,
                    span: (n.span.start, n.span.end),
                    kind: n.kind(),
                    subtype: n.node_type,
                })
                .collect(),
            edges: d
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    child: e.child.0,
                    parent: e.parent.0,
                    relation: e.relation,
                })
                .collect(),
            dct: d.dct.clone(),
            domain: d.domain,
        }
    }
}

impl DocumentRecord {
    fn into_document(self) -> Result<Document> {
        let mut doc = Document {
            id: self.id,
            tokens: self
                .tokens
                .into_iter()
                .map(|(form, pos)| Token { form, pos })
                .collect(),
            sentences: self
                .sentences
                .into_iter()
                .map(|(s, e)| Span::new(s, e))
                .collect(),
            nodes: Vec::with_capacity(self.nodes.len()),
            edges: self
                .edges
                .into_iter()
                .map(|e| Edge {
                    child: NodeId(e.child),
                    parent: NodeId(e.parent),
                    relation: e.relation,
                })
                .collect(),
            dct: self.dct,
            domain: self.domain,
        };
        for n in self.nodes {
            if n.subtype.kind() != n.kind {
                return Err(Error::invalid(
                    &doc.id,
                    format!(
                        "node {}: subtype {} is not of kind {:?}",
                        n.id, n.subtype, n.kind
                    ),
                ));
            }
            let span = Span::new(n.span.0, n.span.1);
            let sent = doc.sentence_of(span.start).ok_or_else(|| {
                Error::invalid(
                    &doc.id,
                    format!("node {}: span {span:?} outside text", n.id),
                )
            })?;
            doc.nodes.push(Node {
                id: NodeId(n.id),
                span,
                node_type: n.subtype,
                sent,
            });
        }
        doc.validate()?;
        Ok(doc)
    }
}

/// Parses JSON Lines text. `context` names the source in error messages.
pub fn parse_documents(text: &str, context: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: DocumentRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            context: context.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        let doc = rec.into_document().map_err(|e| Error::Parse {
            context: context.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn to_jsonl(docs: &[Document]) -> Result<String> {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(&DocumentRecord::from(d))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_documents(&text, &path.display().to_string())
}

pub fn write_documents(path: &Path, docs: &[Document]) -> Result<()> {
    fs::write(path, to_jsonl(docs)?).map_err(|e| Error::io(path, e))
}
