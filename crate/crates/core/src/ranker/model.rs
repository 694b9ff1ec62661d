use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::candidates::{candidate_sets, CandidateSet};
use super::decode::CandidateScorer;
use super::features::{nd_class, one_hot, ss_class, ND_WIDTH, SS_WIDTH};
use crate::autodiff::nn::{BiLstm, Embedding, Mlp};
use crate::autodiff::{Checkpoint, Graph, ParamId, ParamStore, Tensor, Var};
use crate::corpus::{Document, MetaNode, NodeRef, NodeType, Relation};
use crate::vocab::Vocab;
use crate::{Error, Result, Scalar};

pub const CHECKPOINT_KIND: &str = "ranker";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `[x_i, x_c]`.
    Basic,
    /// Adds type embeddings and the distance one-hots.
    Enriched,
    /// Enriched plus attention-pooled span vectors.
    Attention,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Unlabeled,
    Labeled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankerConfig {
    pub word_dim: usize,
    pub type_dim: usize,
    pub lstm_dim: usize,
    pub hidden_dim: usize,
    pub variant: Variant,
    pub mode: Mode,
    /// Relations scored in labeled mode.
    pub labels: Vec<Relation>,
    /// Tokens added on each side of a span before attention pooling.
    pub context_margin: usize,
    pub relation_mask: bool,
}

impl Default for RankerConfig {
    fn default() -> Self {
        RankerConfig {
            word_dim: 32,
            type_dim: 16,
            lstm_dim: 32,
            hidden_dim: 32,
            variant: Variant::Attention,
            mode: Mode::Labeled,
            labels: Relation::ALL.to_vec(),
            context_margin: 0,
            relation_mask: true,
        }
    }
}

impl RankerConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [self.word_dim, self.type_dim, self.lstm_dim, self.hidden_dim];
        if dims.contains(&0) {
            return Err(Error::Config("ranker dimensions must be positive".into()));
        }
        if !self.lstm_dim.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "ranker Bi-LSTM size {} must be even",
                self.lstm_dim
            )));
        }
        if self.mode == Mode::Labeled && self.labels.is_empty() {
            return Err(Error::Config(
                "labeled mode needs at least one relation".into(),
            ));
        }
        Ok(())
    }

    /// Scores per candidate.
    pub fn width(&self) -> usize {
        match self.mode {
            Mode::Unlabeled => 1,
            Mode::Labeled => self.labels.len(),
        }
    }

    pub fn pair_width(&self) -> usize {
        let d = self.lstm_dim;
        match self.variant {
            Variant::Basic => 2 * d,
            Variant::Enriched => 2 * d + 2 * self.type_dim + ND_WIDTH + SS_WIDTH,
            Variant::Attention => 4 * d + 2 * self.type_dim + ND_WIDTH + SS_WIDTH,
        }
    }

    fn normalized(mut self) -> Self {
        self.labels.sort();
        self.labels.dedup();
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Layers {
    words: Embedding,
    types: Embedding,
    meta: Embedding,
    encoder: BiLstm,
    attention: Option<ParamId>,
    scorer: Mlp,
}

/// Neural ranking parser.
#[derive(Clone, Debug)]
pub struct RankerModel<T> {
    config: RankerConfig,
    vocab: Vocab,
    layers: Layers,
    pub store: ParamStore<T>,
}

/// Per-document vectors shared by every pair scored in one graph.
pub(crate) struct Encoded {
    x: Vec<Var>,
    xhat: Vec<Var>,
    meta: Vec<Var>,
    types: Vec<Option<Var>>,
}

impl<T: Scalar> RankerModel<T> {
    pub fn new(config: RankerConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let config = config.normalized();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let words = Embedding::new(&mut store, "words", vocab.len(), config.word_dim, &mut rng);
        let types = Embedding::new(
            &mut store,
            "types",
            NodeType::ALL.len(),
            config.type_dim,
            &mut rng,
        );
        let meta = Embedding::new(
            &mut store,
            "meta",
            MetaNode::ALL.len(),
            config.lstm_dim,
            &mut rng,
        );
        let encoder = BiLstm::new(
            &mut store,
            "encoder",
            config.word_dim,
            config.lstm_dim,
            &mut rng,
        );
        let attention = (config.variant == Variant::Attention)
            .then(|| store.add_uniform("attention", &[1, config.lstm_dim], &mut rng));
        let scorer = Mlp::new(
            &mut store,
            "scorer",
            config.pair_width(),
            config.hidden_dim,
            config.width(),
            &mut rng,
        );
        Ok(RankerModel {
            config,
            vocab,
            layers: Layers {
                words,
                types,
                meta,
                encoder,
                attention,
                scorer,
            },
            store,
        })
    }

    pub fn config(&self) -> &RankerConfig {
        &self.config
    }

    pub fn is_labeled(&self) -> bool {
        self.config.mode == Mode::Labeled
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn word_ids(&self, doc: &Document) -> Vec<usize> {
        doc.tokens.iter().map(|t| self.vocab.get(&t.form)).collect()
    }

    pub(crate) fn encode<'p>(
        &self,
        g: &mut Graph<'p, T>,
        doc: &Document,
        words: &[usize],
    ) -> Encoded {
        let l = &self.layers;
        let meta = (0..MetaNode::ALL.len())
            .map(|m| l.meta.forward(g, m))
            .collect();
        let mut enc = Encoded {
            x: Vec::new(),
            xhat: Vec::new(),
            meta,
            types: vec![None; NodeType::ALL.len()],
        };
        if doc.nodes.is_empty() {
            return enc;
        }
        let inputs: Vec<Var> = words.iter().map(|&w| l.words.forward(g, w)).collect();
        let states = l.encoder.encode(g, &inputs);
        for node in &doc.nodes {
            let span = &states[node.span.start..node.span.end];
            enc.x.push(g.sum(span));
            if let Some(w) = l.attention {
                let lo = node.span.start.saturating_sub(self.config.context_margin);
                let hi = (node.span.end + self.config.context_margin).min(states.len());
                let items = &states[lo..hi];
                let w = g.param(w);
                let alphas: Vec<Var> = items
                    .iter()
                    .map(|&s| {
                        let a = g.matvec(w, s);
                        g.tanh(a)
                    })
                    .collect();
                let alphas = g.concat(&alphas);
                let weights = g.softmax(alphas);
                enc.xhat.push(g.weighted_sum(weights, items));
            }
        }
        enc
    }

    fn type_var(&self, g: &mut Graph<'_, T>, enc: &mut Encoded, ty: NodeType) -> Var {
        let i = ty.index();
        *enc.types[i].get_or_insert_with(|| self.layers.types.forward(g, i))
    }

    fn node_vecs(enc: &Encoded, r: NodeRef) -> (Var, Option<Var>) {
        match r {
            NodeRef::Meta(m) => (enc.meta[m.index()], Some(enc.meta[m.index()])),
            NodeRef::Text(i) => (enc.x[i], enc.xhat.get(i).copied()),
        }
    }

    /// Pair representation `g` for `(child, cand)`.
    pub(crate) fn pair(
        &self,
        g: &mut Graph<'_, T>,
        enc: &mut Encoded,
        doc: &Document,
        child: usize,
        cand: NodeRef,
    ) -> Var {
        let (xc, hc) = Self::node_vecs(enc, NodeRef::Text(child));
        let (xp, hp) = Self::node_vecs(enc, cand);
        let mut parts = vec![xc, xp];
        if self.config.variant != Variant::Basic {
            let tc = self.type_var(g, enc, doc.nodes[child].node_type);
            let tp = self.type_var(g, enc, doc.ref_type(cand));
            let nd = g.input(Tensor::from_f64(
                &[ND_WIDTH],
                &one_hot(ND_WIDTH, nd_class(doc, child, cand)),
            ));
            let ss = g.input(Tensor::from_f64(
                &[SS_WIDTH],
                &one_hot(SS_WIDTH, ss_class(doc, child, cand)),
            ));
            parts.extend([tc, tp, nd, ss]);
        }
        if self.config.variant == Variant::Attention {
            parts.push(hc.expect("attention vectors present"));
            parts.push(hp.expect("attention vectors present"));
        }
        g.concat(&parts)
    }

    /// Score vector `c_i` over a candidate set.
    pub(crate) fn scores(
        &self,
        g: &mut Graph<'_, T>,
        enc: &mut Encoded,
        doc: &Document,
        set: &CandidateSet,
    ) -> Var {
        let per: Vec<Var> = set
            .candidates
            .iter()
            .map(|&c| {
                let p = self.pair(g, enc, doc, set.child, c);
                self.layers.scorer.forward(g, p)
            })
            .collect();
        g.concat(&per)
    }

    /// Flattened index of the gold `(parent, relation)` entry, if scorable.
    pub fn gold_entry(&self, set: &CandidateSet, parent: NodeRef, rel: Relation) -> Option<usize> {
        let c = set.position(parent)?;
        match self.config.mode {
            Mode::Unlabeled => Some(c),
            Mode::Labeled => {
                let r = self.config.labels.iter().position(|&l| l == rel)?;
                Some(c * self.config.labels.len() + r)
            }
        }
    }

    /// Summed cross-entropy of the gold tree of `doc`, with the number of
    /// nodes whose gold entry is not among the candidates. `None` when no
    /// node could be scored.
    pub fn document_loss(
        &self,
        g: &mut Graph<'_, T>,
        doc: &Document,
        gold: &[(NodeRef, Relation)],
        words: &[usize],
    ) -> (Option<Var>, usize) {
        let mut enc = self.encode(g, doc, words);
        let mut losses = Vec::new();
        let mut skipped = 0;
        for set in candidate_sets(doc) {
            let (p, r) = gold[set.child];
            match self.gold_entry(&set, p, r) {
                Some(k) => {
                    let s = self.scores(g, &mut enc, doc, &set);
                    losses.push(g.cross_entropy(s, k));
                }
                None => skipped += 1,
            }
        }
        let loss = (!losses.is_empty()).then(|| g.sum(&losses));
        (loss, skipped)
    }

    /// Scores one candidate set in a fresh graph.
    pub fn score_candidates(&self, doc: &Document, set: &CandidateSet) -> Vec<f64> {
        let mut g = Graph::new(&self.store);
        let mut enc = self.encode(&mut g, doc, &self.word_ids(doc));
        let s = self.scores(&mut g, &mut enc, doc, set);
        g.value(s).data().iter().map(|x| x.as_f64()).collect()
    }

    pub fn to_checkpoint(&self) -> Checkpoint<T, RankerConfig> {
        let mut vocabs = BTreeMap::new();
        vocabs.insert("words".to_string(), self.vocab.items().to_vec());
        Checkpoint::new(
            CHECKPOINT_KIND,
            self.config.clone(),
            vocabs,
            self.store.clone(),
        )
    }

    pub fn from_checkpoint(ck: Checkpoint<T, RankerConfig>) -> Result<Self> {
        let words = ck
            .vocabularies
            .get("words")
            .ok_or_else(|| Error::Checkpoint("missing vocabulary 'words'".into()))?;
        let vocab = Vocab::from_items(words.clone())?;
        let mut model = Self::new(ck.hyperparameters, vocab, 0)?;
        adopt(&mut model.store, ck.tensors)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_checkpoint().save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(Checkpoint::load(path, CHECKPOINT_KIND)?)
    }
}

/// Replaces `store` by `loaded` after checking names and shapes agree.
pub(crate) fn adopt<T: Scalar>(store: &mut ParamStore<T>, loaded: ParamStore<T>) -> Result<()> {
    let a: Vec<_> = store.iter().map(|t| (&t.name, t.tensor.shape())).collect();
    let b: Vec<_> = loaded.iter().map(|t| (&t.name, t.tensor.shape())).collect();
    if a != b {
        return Err(Error::Checkpoint(
            "tensor layout does not match the stored hyperparameters".into(),
        ));
    }
    *store = loaded;
    Ok(())
}

impl<T: Scalar> CandidateScorer for RankerModel<T> {
    fn labels(&self) -> Option<&[Relation]> {
        match self.config.mode {
            Mode::Unlabeled => None,
            Mode::Labeled => Some(&self.config.labels),
        }
    }

    fn relation_mask(&self) -> bool {
        self.config.relation_mask
    }

    fn score_document(&self, doc: &Document, sets: &[CandidateSet]) -> Vec<Vec<f64>> {
        if sets.is_empty() {
            return Vec::new();
        }
        let mut g = Graph::new(&self.store);
        let mut enc = self.encode(&mut g, doc, &self.word_ids(doc));
        let vars: Vec<Var> = sets
            .iter()
            .map(|s| self.scores(&mut g, &mut enc, doc, s))
            .collect();
        vars.into_iter()
            .map(|v| g.value(v).data().iter().map(|x| x.as_f64()).collect())
            .collect()
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::autodiff::check::check_gradients;
    use crate::autodiff::nn::{assign, zero_all};
    use crate::corpus::parse_documents;
    use crate::ranker::{decode, extract_candidates};
    use approx::assert_abs_diff_eq;

    const FIXTURE: &str = r#"{"id":"g","tokens":[["w1","NN"],["rel_before_0","AD"],["event_0","VV"],["w2","NN"],["state_1","VA"],["then","AD"],["vague-time_0","NT"],["end","NN"]],"sentences":[[0,4],[4,8]],"nodes":[{"id":0,"span":[1,3],"kind":"event","subtype":"event"},{"id":1,"span":[4,5],"kind":"event","subtype":"state"},{"id":2,"span":[6,7],"kind":"time","subtype":"vague-time"}],"edges":[{"child":0,"parent":-1,"relation":"before"},{"child":1,"parent":0,"relation":"overlap"},{"child":2,"parent":-1,"relation":"depend-on"}]}"#;

    pub(crate) fn fixture() -> Document {
        parse_documents(FIXTURE, "fixture").unwrap().remove(0)
    }

    fn small(variant: Variant, mode: Mode) -> RankerConfig {
        RankerConfig {
            word_dim: 4,
            type_dim: 3,
            lstm_dim: 4,
            hidden_dim: 5,
            variant,
            mode,
            ..RankerConfig::default()
        }
    }

    fn model(variant: Variant, mode: Mode) -> RankerModel<f64> {
        let d = fixture();
        let vocab = Vocab::build(d.tokens.iter().map(|t| t.form.as_str()));
        RankerModel::new(small(variant, mode), vocab, 9).unwrap()
    }

    fn states(m: &RankerModel<f64>, d: &Document) -> Vec<Vec<f64>> {
        let mut g = Graph::new(&m.store);
        let inputs: Vec<Var> = m
            .word_ids(d)
            .iter()
            .map(|&w| m.layers.words.forward(&mut g, w))
            .collect();
        let s = m.layers.encoder.encode(&mut g, &inputs);
        s.iter().map(|&v| g.value(v).data().to_vec()).collect()
    }

    #[test]
    fn span_sum() {
        let m = model(Variant::Basic, Mode::Unlabeled);
        let mut d = fixture();
        d.nodes[0].span = crate::corpus::Span::new(0, 3);
        let w = states(&m, &d);
        let mut g = Graph::new(&m.store);
        let enc = m.encode(&mut g, &d, &m.word_ids(&d));
        for k in 0..4 {
            assert_abs_diff_eq!(
                g.value(enc.x[0]).data()[k],
                w[0][k] + w[1][k] + w[2][k],
                epsilon = 1e-15
            );
            assert_eq!(g.value(enc.x[1]).data()[k], w[4][k]);
        }
    }

    #[test]
    fn attention_pooling() {
        let mut m = model(Variant::Attention, Mode::Unlabeled);
        let d = fixture();
        let w = states(&m, &d);
        let att = m.layers.attention.unwrap();
        let weights = [0.7, -1.3, 0.4, 2.0];
        assign(&mut m.store, att, Tensor::from_f64(&[1, 4], &weights));
        let mut g = Graph::new(&m.store);
        let enc = m.encode(&mut g, &d, &m.word_ids(&d));
        let alpha: Vec<f64> = [1, 2]
            .iter()
            .map(|&t| {
                w[t].iter()
                    .zip(&weights)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .tanh()
            })
            .collect();
        let z = alpha[0].exp() + alpha[1].exp();
        let (a, b) = (alpha[0].exp() / z, alpha[1].exp() / z);
        for k in 0..4 {
            assert_abs_diff_eq!(
                g.value(enc.xhat[0]).data()[k],
                a * w[1][k] + b * w[2][k],
                epsilon = 1e-12
            );
            // single-token span ignores W
            assert_abs_diff_eq!(g.value(enc.xhat[1]).data()[k], w[4][k], epsilon = 1e-15);
        }

        assign(&mut m.store, att, Tensor::zeros(&[1, 4]));
        let mut g = Graph::new(&m.store);
        let enc = m.encode(&mut g, &d, &m.word_ids(&d));
        for k in 0..4 {
            assert_abs_diff_eq!(
                g.value(enc.xhat[0]).data()[k],
                (w[1][k] + w[2][k]) / 2.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn score_shapes_and_symmetry() {
        let d = fixture();
        let m = model(Variant::Enriched, Mode::Labeled);
        let set = extract_candidates(&d, 1);
        assert_eq!(m.score_candidates(&d, &set).len(), set.len() * 5);

        let mut z = model(Variant::Attention, Mode::Labeled);
        zero_all(&mut z.store);
        let r = decode(&z, &d);
        for dec in &r.decisions {
            let first = dec.probabilities[0];
            assert!(dec.probabilities.iter().all(|&p| (p - first).abs() < 1e-15));
        }
    }

    #[test]
    fn pair_widths() {
        assert_eq!(small(Variant::Basic, Mode::Unlabeled).pair_width(), 8);
        assert_eq!(
            small(Variant::Enriched, Mode::Unlabeled).pair_width(),
            8 + 6 + 6
        );
        assert_eq!(
            small(Variant::Attention, Mode::Unlabeled).pair_width(),
            16 + 6 + 6
        );
    }

    #[test]
    fn gradients_match_finite_differences() {
        let d = fixture();
        let gold = crate::ranker::gold_trees(std::slice::from_ref(&d))
            .unwrap()
            .remove(0);
        for variant in [Variant::Basic, Variant::Enriched, Variant::Attention] {
            for mode in [Mode::Unlabeled, Mode::Labeled] {
                let m = model(variant, mode);
                let words = m.word_ids(&d);
                let mut g = Graph::new(&m.store);
                let (loss, skipped) = m.document_loss(&mut g, &d, &gold, &words);
                assert_eq!(skipped, 0);
                let grads = g.backward(loss.unwrap()).unwrap();
                let mut store = m.store.clone();
                let report = check_gradients(
                    &mut store,
                    &grads,
                    |s| {
                        let mut g = Graph::new(s);
                        let (l, _) = m.document_loss(&mut g, &d, &gold, &words);
                        g.value(l.unwrap()).data()[0]
                    },
                    1e-3,
                    1e-4,
                    1e-6,
                    None,
                );
                assert!(
                    report.passed(),
                    "{variant:?} {mode:?}: {:?}",
                    &report.failures[..report.failures.len().min(3)]
                );
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = model(Variant::Attention, Mode::Labeled);
        let bytes = m.to_checkpoint().to_bytes().unwrap();
        let back = RankerModel::<f64>::from_checkpoint(
            Checkpoint::from_bytes(&bytes, CHECKPOINT_KIND).unwrap(),
        )
        .unwrap();
        assert_eq!(back.to_checkpoint().to_bytes().unwrap(), bytes);
        let d = fixture();
        assert_eq!(decode(&back, &d), decode(&m, &d));
    }
}
