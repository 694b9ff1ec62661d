use std::collections::HashMap;

use crate::corpus::Document;

pub const FALLBACK_POS: &str = "NOUN";

/// Most-frequent-tag lookup learned from tagged documents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PosTagger {
    table: HashMap<String, String>,
}

impl PosTagger {
    pub fn train(docs: &[Document]) -> Self {
        let mut counts: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
        for d in docs {
            for t in &d.tokens {
                *counts
                    .entry(&t.form)
                    .or_default()
                    .entry(&t.pos)
                    .or_default() += 1;
            }
        }
        let table = counts
            .into_iter()
            .map(|(w, tags)| {
                // highest count, then alphabetical
                let best = tags
                    .into_iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
                    .map(|(t, _)| t.to_string())
                    .unwrap_or_default();
                (w.to_string(), best)
            })
            .collect();
        PosTagger { table }
    }

    pub fn tag(&self, form: &str) -> &str {
        self.table.get(form).map_or(FALLBACK_POS, String::as_str)
    }

    /// A copy of `doc` with every POS tag replaced.
    pub fn retag(&self, doc: &Document) -> Document {
        let mut out = doc.clone();
        for t in &mut out.tokens {
            t.pos = self.tag(&t.form).to_string();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Span, Token};

    #[test]
    fn majority_then_fallback() {
        let toks = vec![
            Token::new("run", "VV"),
            Token::new("run", "NN"),
            Token::new("run", "VV"),
            Token::new("it", "PN"),
        ];
        let d = Document::new("p", toks, vec![Span::new(0, 4)]);
        let p = PosTagger::train(std::slice::from_ref(&d));
        assert_eq!(p.tag("run"), "VV");
        assert_eq!(p.tag("unseen"), FALLBACK_POS);
        assert_eq!(p.retag(&d).tokens[1].pos, "VV");
    }
}
