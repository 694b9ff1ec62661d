use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::nn::{BiLstm, Embedding, Mlp};
use crate::autodiff::{Adam, AdamConfig, Checkpoint, Graph, ParamStore, Var};
use crate::corpus::{bio_decode, bio_encode, BioTag, Document, Span, NUM_BIO_TAGS};
use crate::eval::{span_prf, SpanMode};
use crate::ranker::adopt;
use crate::training::{noisy_ids, singletons, EarlyStopping, EpochStats, TrainLog};
use crate::vocab::Vocab;
use crate::{Error, Result, Scalar};

pub const CHECKPOINT_KIND: &str = "tagger";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggerConfig {
    pub word_dim: usize,
    pub pos_dim: usize,
    pub lstm_dim: usize,
    pub hidden_dim: usize,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            word_dim: 256,
            pos_dim: 32,
            lstm_dim: 256,
            hidden_dim: 256,
        }
    }
}

impl TaggerConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [self.word_dim, self.pos_dim, self.lstm_dim, self.hidden_dim];
        if dims.contains(&0) {
            return Err(Error::Config("tagger dimensions must be positive".into()));
        }
        if !self.lstm_dim.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "tagger Bi-LSTM size {} must be even",
                self.lstm_dim
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagTrainConfig {
    /// Epoch budget (also the cap when a development set is given).
    pub epochs: usize,
    pub patience: usize,
    pub adam: AdamConfig,
    pub unk_prob: f64,
}

impl Default for TagTrainConfig {
    fn default() -> Self {
        TagTrainConfig {
            epochs: 50,
            patience: 5,
            adam: AdamConfig::default(),
            unk_prob: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Layers {
    words: Embedding,
    pos: Embedding,
    encoder: BiLstm,
    output: Mlp,
}

/// Bi-LSTM BIO tagger over word and POS embeddings.
#[derive(Clone, Debug)]
pub struct TaggerModel<T> {
    config: TaggerConfig,
    words: Vocab,
    pos: Vocab,
    layers: Layers,
    pub store: ParamStore<T>,
}

impl<T: Scalar> TaggerModel<T> {
    pub fn new(config: TaggerConfig, words: Vocab, pos: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let layers = Layers {
            words: Embedding::new(&mut store, "words", words.len(), config.word_dim, &mut rng),
            pos: Embedding::new(&mut store, "pos", pos.len(), config.pos_dim, &mut rng),
            encoder: BiLstm::new(
                &mut store,
                "encoder",
                config.word_dim + config.pos_dim,
                config.lstm_dim,
                &mut rng,
            ),
            output: Mlp::new(
                &mut store,
                "output",
                config.lstm_dim,
                config.hidden_dim,
                NUM_BIO_TAGS,
                &mut rng,
            ),
        };
        Ok(TaggerModel {
            config,
            words,
            pos,
            layers,
            store,
        })
    }

    pub fn config(&self) -> &TaggerConfig {
        &self.config
    }

    pub fn word_ids(&self, doc: &Document) -> Vec<usize> {
        doc.tokens.iter().map(|t| self.words.get(&t.form)).collect()
    }

    pub fn pos_ids(&self, doc: &Document) -> Vec<usize> {
        doc.tokens.iter().map(|t| self.pos.get(&t.pos)).collect()
    }

    /// Tag score vectors for one sentence.
    pub fn sentence_scores(
        &self,
        g: &mut Graph<'_, T>,
        words: &[usize],
        pos: &[usize],
    ) -> Vec<Var> {
        let l = &self.layers;
        let inputs: Vec<Var> = words
            .iter()
            .zip(pos)
            .map(|(&w, &p)| {
                let w = l.words.forward(g, w);
                let p = l.pos.forward(g, p);
                g.concat(&[w, p])
            })
            .collect();
        let states = l.encoder.encode(g, &inputs);
        states.into_iter().map(|h| l.output.forward(g, h)).collect()
    }

    /// Summed token cross-entropy of one sentence.
    pub fn sentence_loss(
        &self,
        g: &mut Graph<'_, T>,
        words: &[usize],
        pos: &[usize],
        gold: &[BioTag],
    ) -> Var {
        let scores = self.sentence_scores(g, words, pos);
        let losses: Vec<Var> = scores
            .into_iter()
            .zip(gold)
            .map(|(s, t)| g.cross_entropy(s, t.index()))
            .collect();
        g.sum(&losses)
    }

    /// Per-token argmax tags (ties to the lowest label) for a sentence.
    pub fn tag_sentence(&self, words: &[usize], pos: &[usize]) -> Vec<BioTag> {
        let mut g = Graph::new(&self.store);
        let scores = self.sentence_scores(&mut g, words, pos);
        scores
            .iter()
            .map(|&s| {
                let v = g.value(s).data();
                let mut best = 0;
                for (k, &x) in v.iter().enumerate() {
                    if x > v[best] {
                        best = k;
                    }
                }
                BioTag::from_index(best)
            })
            .collect()
    }

    /// A copy of `doc` whose nodes are the predicted spans (edges cleared).
    pub fn predict(&self, doc: &Document) -> Result<Document> {
        if doc.tokens.is_empty() {
            return Err(Error::Precondition(format!(
                "document {} has no tokens to tag",
                doc.id
            )));
        }
        let words = self.word_ids(doc);
        let pos = self.pos_ids(doc);
        let mut spans = Vec::new();
        for s in &doc.sentences {
            let tags = self.tag_sentence(&words[s.start..s.end], &pos[s.start..s.end]);
            spans.extend(
                bio_decode(&tags)
                    .into_iter()
                    .map(|(sp, t)| (Span::new(sp.start + s.start, sp.end + s.start), t)),
            );
        }
        let mut out = doc.clone();
        out.set_nodes(spans)?;
        Ok(out)
    }

    pub fn to_checkpoint(&self) -> Checkpoint<T, TaggerConfig> {
        let mut vocabs = BTreeMap::new();
        vocabs.insert("words".to_string(), self.words.items().to_vec());
        vocabs.insert("pos".to_string(), self.pos.items().to_vec());
        Checkpoint::new(
            CHECKPOINT_KIND,
            self.config.clone(),
            vocabs,
            self.store.clone(),
        )
    }

    pub fn from_checkpoint(ck: Checkpoint<T, TaggerConfig>) -> Result<Self> {
        let get = |name: &str| -> Result<Vocab> {
            let items = ck
                .vocabularies
                .get(name)
                .ok_or_else(|| Error::Checkpoint(format!("missing vocabulary '{name}'")))?;
            Vocab::from_items(items.clone())
        };
        let (words, pos) = (get("words")?, get("pos")?);
        let mut model = Self::new(ck.hyperparameters, words, pos, 0)?;
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

/// Predicts nodes for every document.
pub fn tag_predict<T: Scalar>(model: &TaggerModel<T>, docs: &[Document]) -> Result<Vec<Document>> {
    docs.iter().map(|d| model.predict(d)).collect()
}

/// Exact-type span f of `model` on `docs`.
pub fn span_score<T: Scalar>(model: &TaggerModel<T>, docs: &[Document]) -> Result<f64> {
    let pred = tag_predict(model, docs)?;
    let pairs: Vec<_> = docs.iter().zip(&pred).collect();
    Ok(span_prf(&pairs, SpanMode::Exact).overall.f1())
}

/// Trains with one Adam update per sentence. With a development set, stops
/// after `patience` epochs without a better exact span f and keeps the best
/// parameters; otherwise runs the whole budget.
pub fn tag_train<T: Scalar>(
    train: &[Document],
    dev: &[Document],
    model_config: TaggerConfig,
    config: &TagTrainConfig,
    seed: u64,
) -> Result<(TaggerModel<T>, TrainLog)> {
    if train.iter().all(|d| d.tokens.is_empty()) {
        return Err(Error::EmptyTrainingSet);
    }
    let words = Vocab::build(
        train
            .iter()
            .flat_map(|d| d.tokens.iter().map(|t| t.form.as_str())),
    );
    let pos = Vocab::build(
        train
            .iter()
            .flat_map(|d| d.tokens.iter().map(|t| t.pos.as_str())),
    );
    let mut model = TaggerModel::<T>::new(model_config, words, pos, seed)?;
    let gold: Vec<Vec<BioTag>> = train.iter().map(bio_encode).collect::<Result<_>>()?;
    let pos_ids: Vec<Vec<usize>> = train.iter().map(|d| model.pos_ids(d)).collect();
    let sentences: Vec<(usize, Span)> = train
        .iter()
        .enumerate()
        .flat_map(|(k, d)| d.sentences.iter().map(move |&s| (k, s)))
        .collect();
    let rare = singletons(train);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut adam = Adam::new(&model.store, config.adam);
    let mut stop = EarlyStopping::new(config.patience.max(1));
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let tokens: usize = train.iter().map(|d| d.tokens.len()).sum();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let words: Vec<Vec<usize>> = train
            .iter()
            .map(|d| noisy_ids(&model.words, d, &rare, config.unk_prob, &mut rng))
            .collect();
        let mut total = 0.0;
        for &i in &order {
            let (k, s) = sentences[i];
            let r = s.start..s.end;
            let mut g = Graph::new(&model.store);
            let loss = model.sentence_loss(
                &mut g,
                &words[k][r.clone()],
                &pos_ids[k][r.clone()],
                &gold[k][r],
            );
            total += g.value(loss).data()[0].as_f64();
            let grads = g.backward(loss)?;
            adam.update(&mut model.store, &grads);
        }
        let dev_f = if dev.is_empty() {
            None
        } else {
            Some(span_score(&model, dev)?)
        };
        log.epochs.push(EpochStats {
            epoch,
            loss: total / tokens as f64,
            dev: dev_f,
        });
        if let Some(f) = dev_f {
            if stop.observe(epoch, f, || model.store.clone()) {
                break;
            }
        }
    }
    match stop.into_best() {
        Some((epoch, store)) => {
            model.store = store;
            log.best_epoch = epoch;
        }
        None => log.best_epoch = log.epochs.len(),
    }
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::check::check_gradients;
    use crate::corpus::parse_documents;

    const FIXTURE: &str = r#"{"id":"g","tokens":[["w1","NN"],["rel_before_0","AD"],["event_0","VV"],["w2","NN"],["state_1","VA"],["then","AD"],["vague-time_0","NT"],["end","NN"]],"sentences":[[0,4],[4,8]],"nodes":[{"id":0,"span":[1,3],"kind":"event","subtype":"event"},{"id":1,"span":[4,5],"kind":"event","subtype":"state"},{"id":2,"span":[6,7],"kind":"time","subtype":"vague-time"}],"edges":[]}"#;

    fn small() -> TaggerConfig {
        TaggerConfig {
            word_dim: 4,
            pos_dim: 3,
            lstm_dim: 4,
            hidden_dim: 5,
        }
    }

    fn model(d: &Document) -> TaggerModel<f64> {
        let words = Vocab::build(d.tokens.iter().map(|t| t.form.as_str()));
        let pos = Vocab::build(d.tokens.iter().map(|t| t.pos.as_str()));
        TaggerModel::new(small(), words, pos, 5).unwrap()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let d = parse_documents(FIXTURE, "t").unwrap().remove(0);
        let m = model(&d);
        let gold = bio_encode(&d).unwrap();
        let (w, p) = (m.word_ids(&d), m.pos_ids(&d));
        let loss = |g: &mut Graph<'_, f64>| {
            let parts: Vec<Var> = d
                .sentences
                .iter()
                .map(|s| {
                    m.sentence_loss(
                        g,
                        &w[s.start..s.end],
                        &p[s.start..s.end],
                        &gold[s.start..s.end],
                    )
                })
                .collect();
            g.sum(&parts)
        };
        let mut g = Graph::new(&m.store);
        let l = loss(&mut g);
        let grads = g.backward(l).unwrap();
        let mut store = m.store.clone();
        let report = check_gradients(
            &mut store,
            &grads,
            |s| {
                let mut g = Graph::new(s);
                let l = loss(&mut g);
                g.value(l).data()[0]
            },
            1e-3,
            1e-4,
            1e-6,
            None,
        );
        assert!(
            report.passed(),
            "{:?}",
            &report.failures[..report.failures.len().min(3)]
        );
    }

    #[test]
    fn untrained_output_is_valid() {
        let d = parse_documents(FIXTURE, "t").unwrap().remove(0);
        let (m, log) = tag_train::<f64>(
            std::slice::from_ref(&d),
            &[],
            small(),
            &TagTrainConfig {
                epochs: 0,
                ..TagTrainConfig::default()
            },
            1,
        )
        .unwrap();
        assert!(log.epochs.is_empty());
        m.predict(&d).unwrap().validate().unwrap();
    }

    #[test]
    fn unknown_words_only_touch_their_input() {
        let d = parse_documents(FIXTURE, "t").unwrap().remove(0);
        let m = model(&d);
        let mut e = d.clone();
        e.tokens[7].form = "never-seen".into();
        let (w, we) = (m.word_ids(&d), m.word_ids(&e));
        assert_eq!(we[7], 0);
        assert_eq!(w[..7], we[..7]);
        m.predict(&e).unwrap();
    }

    #[test]
    fn empty_document_is_rejected() {
        let d = parse_documents(FIXTURE, "t").unwrap().remove(0);
        let m = model(&d);
        let empty = Document::new("e", vec![], vec![]);
        assert!(matches!(m.predict(&empty), Err(Error::Precondition(_))));
    }

    #[test]
    fn checkpoint_round_trip() {
        let d = parse_documents(FIXTURE, "t").unwrap().remove(0);
        let m = model(&d);
        let bytes = m.to_checkpoint().to_bytes().unwrap();
        let back = TaggerModel::<f64>::from_checkpoint(
            Checkpoint::from_bytes(&bytes, CHECKPOINT_KIND).unwrap(),
        )
        .unwrap();
        assert_eq!(back.to_checkpoint().to_bytes().unwrap(), bytes);
        assert_eq!(back.predict(&d).unwrap(), m.predict(&d).unwrap());
    }
}
