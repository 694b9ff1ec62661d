use super::candidates::{candidate_sets, CandidateSet};
use crate::autodiff::softmax;
use crate::corpus::{Document, Domain, NodeRef, Relation, TemporalTree};

/// Anything that scores candidate parents: one entry per candidate when
/// unlabeled, `|L|` per candidate (candidate-major) when labeled.
pub trait CandidateScorer {
    /// The relation labels scored, or `None` for an unlabeled scorer.
    fn labels(&self) -> Option<&[Relation]>;

    /// Whether labeled decoding masks relations illegal for the child kind.
    fn relation_mask(&self) -> bool {
        true
    }

    fn score_document(&self, doc: &Document, sets: &[CandidateSet]) -> Vec<Vec<f64>>;
}

/// One greedy attachment decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub candidates: Vec<NodeRef>,
    /// Softmax over every score entry.
    pub probabilities: Vec<f64>,
    /// Index of the chosen entry.
    pub chosen: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseResult {
    pub tree: TemporalTree,
    pub decisions: Vec<Decision>,
}

impl ParseResult {
    /// A copy of `doc` whose edges are this parse.
    pub fn apply(&self, doc: &Document) -> Document {
        let mut out = doc.clone();
        out.edges = self.tree.to_edges(doc);
        out
    }
}

/// Relation given to every edge by unlabeled decoders.
pub fn default_relation(doc: &Document) -> Relation {
    doc.domain.unwrap_or(Domain::News).default_relation()
}

/// Which score entries of `set` may be chosen given the parents assigned so
/// far: candidates in the child's current subtree are excluded and, when
/// `relation_mask` holds, so are relations illegal for the child. The
/// relation mask is dropped if it would exclude everything.
pub fn legal_entries(
    doc: &Document,
    set: &CandidateSet,
    parents: &[Option<NodeRef>],
    labels: Option<&[Relation]>,
    relation_mask: bool,
) -> Vec<bool> {
    let child = set.child;
    let in_subtree = |mut k: usize| -> bool {
        loop {
            if k == child {
                return true;
            }
            match parents[k] {
                Some(NodeRef::Text(p)) => k = p,
                _ => return false,
            }
        }
    };
    let cand_ok: Vec<bool> = set
        .candidates
        .iter()
        .map(|&c| match c {
            NodeRef::Meta(_) => true,
            NodeRef::Text(k) => !in_subtree(k),
        })
        .collect();
    let Some(labels) = labels else { return cand_ok };
    let kind = doc.nodes[child].kind();
    let rel_ok: Vec<bool> = labels
        .iter()
        .map(|r| !relation_mask || r.allowed_for(kind))
        .collect();
    let rel_ok = if rel_ok.iter().any(|&b| b) {
        rel_ok
    } else {
        vec![true; labels.len()]
    };
    cand_ok
        .iter()
        .flat_map(|&c| rel_ok.iter().map(move |&r| c && r))
        .collect()
}

/// Attaches nodes in textual order, each to the best legal entry of its
/// scores. Ties go to the earliest entry.
pub fn greedy_decode(
    doc: &Document,
    sets: &[CandidateSet],
    scores: &[Vec<f64>],
    labels: Option<&[Relation]>,
    relation_mask: bool,
) -> ParseResult {
    let n = doc.nodes.len();
    let width = labels.map_or(1, <[Relation]>::len);
    let fallback = default_relation(doc);
    let mut parents: Vec<Option<NodeRef>> = vec![None; n];
    let mut entries = Vec::with_capacity(n);
    let mut decisions = Vec::with_capacity(n);
    for (set, s) in sets.iter().zip(scores) {
        assert_eq!(
            s.len(),
            set.len() * width,
            "score vector has the wrong length"
        );
        let legal = legal_entries(doc, set, &parents, labels, relation_mask);
        let mut best: Option<usize> = None;
        for (k, &ok) in legal.iter().enumerate() {
            if ok && best.is_none_or(|b| s[k] > s[b]) {
                best = Some(k);
            }
        }
        let chosen = best.expect("meta candidates are always legal");
        let parent = set.candidates[chosen / width];
        let relation = match labels {
            Some(l) => l[chosen % width],
            None => fallback,
        };
        let relation = if relation.allowed_for(doc.nodes[set.child].kind()) {
            relation
        } else {
            fallback
        };
        parents[set.child] = Some(parent);
        entries.push((set.child, parent, relation));
        decisions.push(Decision {
            candidates: set.candidates.clone(),
            probabilities: softmax(s),
            chosen,
        });
    }
    entries.sort_by_key(|e| e.0);
    ParseResult {
        tree: TemporalTree::new(entries.into_iter().map(|(_, p, r)| (p, r)).collect()),
        decisions,
    }
}

/// Scores every candidate set of `doc` and decodes greedily.
pub fn decode<S: CandidateScorer + ?Sized>(scorer: &S, doc: &Document) -> ParseResult {
    let sets = candidate_sets(doc);
    let scores = scorer.score_document(doc, &sets);
    greedy_decode(doc, &sets, &scores, scorer.labels(), scorer.relation_mask())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, MetaNode, SynthParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixed(Vec<Vec<f64>>, Option<Vec<Relation>>);

    impl CandidateScorer for Fixed {
        fn labels(&self) -> Option<&[Relation]> {
            self.1.as_deref()
        }
        fn score_document(&self, _: &Document, _: &[CandidateSet]) -> Vec<Vec<f64>> {
            self.0.clone()
        }
    }

    fn one_doc(seed: u64) -> Document {
        let p = SynthParams {
            docs: 1,
            ..SynthParams::default()
        };
        generate_synthetic(&p, seed).unwrap().remove(0)
    }

    #[test]
    fn zero_scores_pick_root() {
        let d = one_doc(3);
        let sets = candidate_sets(&d);
        let scores = sets.iter().map(|s| vec![0.0; s.len()]).collect();
        let r = decode(&Fixed(scores, None), &d);
        assert!(r
            .tree
            .entries()
            .iter()
            .all(|e| e.0 == NodeRef::Meta(MetaNode::Root)));
        for dec in &r.decisions {
            let total: f64 = dec.probabilities.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_scores_give_valid_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..50 {
            let d = one_doc(seed);
            let sets = candidate_sets(&d);
            let all = Relation::ALL.to_vec();
            let scores = sets
                .iter()
                .map(|s| (0..s.len() * 5).map(|_| rng.gen_range(-3.0..3.0)).collect())
                .collect();
            let r = decode(&Fixed(scores, Some(all)), &d);
            r.tree.check(&d).unwrap();
        }
    }

    #[test]
    fn descendants_are_masked() {
        let d = crate::corpus::parse_documents(
            r#"{"id":"m","tokens":[["a","VV"],["b","VV"],["c","VV"]],"sentences":[[0,3]],"nodes":[{"id":0,"span":[0,1],"kind":"event","subtype":"event"},{"id":1,"span":[1,2],"kind":"event","subtype":"event"},{"id":2,"span":[2,3],"kind":"event","subtype":"event"}],"edges":[]}"#,
            "t",
        )
        .unwrap()
        .remove(0);
        let sets = candidate_sets(&d);
        let mut parents = vec![None; 3];
        // node 0 hangs below node 1, so node 1 may not pick node 0
        parents[0] = Some(NodeRef::Text(1));
        let legal = legal_entries(&d, &sets[1], &parents, None, true);
        assert_eq!(legal, [true, true, true, true, true, false, true]);
        // and the relation mask hides depend-on for an event child
        let legal = legal_entries(&d, &sets[2], &parents, Some(&Relation::ALL), true);
        assert_eq!(legal.iter().filter(|&&b| b).count(), 7 * 4);
    }
}
