use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{extract_features, quoted_tokens};
use crate::autodiff::{
    softmax, Adam, AdamConfig, Checkpoint, Gradients, ParamId, ParamStore, Tensor,
};
use crate::corpus::{Document, NodeRef, Relation};
use crate::ranker::{
    adopt, attachment_score, candidate_sets, gold_trees, CandidateScorer, CandidateSet, Mode,
};
use crate::training::{EarlyStopping, EpochStats, TrainLog};
use crate::vocab::Vocab;
use crate::{Error, Result, Scalar};

pub const CHECKPOINT_KIND: &str = "logreg";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRegConfig {
    pub mode: Mode,
    pub labels: Vec<Relation>,
    pub relation_mask: bool,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            mode: Mode::Labeled,
            labels: Relation::ALL.to_vec(),
            relation_mask: true,
        }
    }
}

impl LogRegConfig {
    fn width(&self) -> usize {
        match self.mode {
            Mode::Unlabeled => 1,
            Mode::Labeled => self.labels.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRegTrainConfig {
    pub epochs: usize,
    pub patience: usize,
    pub adam: AdamConfig,
    pub l2: f64,
}

impl Default for LogRegTrainConfig {
    fn default() -> Self {
        LogRegTrainConfig {
            epochs: 100,
            patience: 5,
            adam: AdamConfig {
                learning_rate: 0.01,
                ..AdamConfig::default()
            },
            l2: 1e-4,
        }
    }
}

/// Active feature ids of one `(child, candidate)` pair. Features outside the
/// model's map are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureVector {
    pub ids: Vec<usize>,
}

/// Linear ranking model over sparse binary features: one weight row and
/// bias per relation label (a single row when unlabeled).
#[derive(Clone, Debug)]
pub struct LogRegModel<T> {
    config: LogRegConfig,
    features: Vocab,
    weights: ParamId,
    bias: ParamId,
    pub store: ParamStore<T>,
}

impl<T: Scalar> LogRegModel<T> {
    /// A zero-weight model over a fixed feature map. Index 0 of the map is
    /// the unknown entry and never fires.
    pub fn new(config: LogRegConfig, features: Vocab) -> Result<Self> {
        let mut config = config;
        if config.mode == Mode::Labeled && config.labels.is_empty() {
            return Err(Error::Config(
                "labeled mode needs at least one relation".into(),
            ));
        }
        config.labels.sort();
        config.labels.dedup();
        let mut store = ParamStore::new();
        let weights = store.add("weights", Tensor::zeros(&[config.width(), features.len()]));
        let bias = store.add("bias", Tensor::zeros(&[config.width()]));
        Ok(LogRegModel {
            config,
            features,
            weights,
            bias,
            store,
        })
    }

    pub fn config(&self) -> &LogRegConfig {
        &self.config
    }

    pub fn features(&self) -> &Vocab {
        &self.features
    }

    pub fn feature_vector(&self, names: &[String]) -> FeatureVector {
        FeatureVector {
            ids: names
                .iter()
                .filter(|n| self.features.contains(n))
                .map(|n| self.features.get(n))
                .collect(),
        }
    }

    /// Sets one weight by feature name; `row` is the label position.
    pub fn set_weight(&mut self, feature: &str, row: usize, value: T) {
        let k = self.features.get(feature);
        assert!(k != 0, "unknown feature {feature}");
        let cols = self.features.len();
        self.store.get_mut(self.weights).data_mut()[row * cols + k] = value;
    }

    fn pair_vectors(
        &self,
        doc: &Document,
        set: &CandidateSet,
        quoted: &[bool],
    ) -> Vec<FeatureVector> {
        set.candidates
            .iter()
            .map(|&c| self.feature_vector(&extract_features(doc, quoted, set.child, c)))
            .collect()
    }

    fn entry_scores(&self, phis: &[FeatureVector]) -> Vec<T> {
        let w = self.store.get(self.weights);
        let b = self.store.get(self.bias).data();
        let cols = self.features.len();
        let width = self.config.width();
        let mut out = Vec::with_capacity(phis.len() * width);
        for phi in phis {
            for (row, &bias) in w.data().chunks(cols.max(1)).zip(b).take(width) {
                out.push(bias + phi.ids.iter().map(|&k| row[k]).sum::<T>());
            }
        }
        out
    }

    fn gold_entry(&self, set: &CandidateSet, parent: NodeRef, rel: Relation) -> Option<usize> {
        let c = set.position(parent)?;
        match self.config.mode {
            Mode::Unlabeled => Some(c),
            Mode::Labeled => {
                let r = self.config.labels.iter().position(|&l| l == rel)?;
                Some(c * self.config.labels.len() + r)
            }
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint<T, LogRegConfig> {
        let mut vocabs = BTreeMap::new();
        vocabs.insert("features".to_string(), self.features.items().to_vec());
        Checkpoint::new(
            CHECKPOINT_KIND,
            self.config.clone(),
            vocabs,
            self.store.clone(),
        )
    }

    pub fn from_checkpoint(ck: Checkpoint<T, LogRegConfig>) -> Result<Self> {
        let names = ck
            .vocabularies
            .get("features")
            .ok_or_else(|| Error::Checkpoint("missing vocabulary 'features'".into()))?;
        let mut model = Self::new(ck.hyperparameters, Vocab::from_items(names.clone())?)?;
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

impl<T: Scalar> CandidateScorer for LogRegModel<T> {
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
        let quoted = quoted_tokens(doc);
        sets.iter()
            .map(|s| {
                let phis = self.pair_vectors(doc, s, &quoted);
                self.entry_scores(&phis)
                    .iter()
                    .map(|x| x.as_f64())
                    .collect()
            })
            .collect()
    }
}

/// Builds the feature map from every candidate pair of the training data,
/// then fits it with softmax cross-entropy, L2 and Adam (one update per
/// document), keeping the best development attachment f.
pub fn logreg_train<T: Scalar>(
    train: &[Document],
    dev: &[Document],
    model_config: LogRegConfig,
    config: &LogRegTrainConfig,
    seed: u64,
) -> Result<(LogRegModel<T>, TrainLog)> {
    if train.iter().all(|d| d.nodes.is_empty()) {
        return Err(Error::EmptyTrainingSet);
    }
    let gold = gold_trees(train)?;
    let mut names = Vocab::new();
    let mut cached: Vec<Vec<(CandidateSet, Vec<Vec<String>>)>> = Vec::with_capacity(train.len());
    for doc in train {
        let quoted = quoted_tokens(doc);
        let per_doc = candidate_sets(doc)
            .into_iter()
            .map(|set| {
                let f: Vec<Vec<String>> = set
                    .candidates
                    .iter()
                    .map(|&c| extract_features(doc, &quoted, set.child, c))
                    .collect();
                for n in f.iter().flatten() {
                    names.add(n);
                }
                (set, f)
            })
            .collect();
        cached.push(per_doc);
    }
    let mut model = LogRegModel::<T>::new(model_config, names)?;
    let vectors: Vec<Vec<(CandidateSet, Vec<FeatureVector>)>> = cached
        .into_iter()
        .map(|d| {
            d.into_iter()
                .map(|(s, f)| {
                    let v = f.iter().map(|n| model.feature_vector(n)).collect();
                    (s, v)
                })
                .collect()
        })
        .collect();

    let mut log = TrainLog::default();
    for (k, doc_sets) in vectors.iter().enumerate() {
        for (set, _) in doc_sets {
            let (p, r) = gold[k][set.child];
            if model.gold_entry(set, p, r).is_none() {
                log.skipped += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adam = Adam::new(&model.store, config.adam);
    let mut stop = EarlyStopping::new(config.patience.max(1));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let width = model.config.width();
    let cols = model.features.len();
    let l2 = T::of(config.l2);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut count) = (0.0, 0usize);
        for &k in &order {
            if vectors[k].is_empty() {
                continue;
            }
            let mut grads = Gradients::zeros_like(&model.store);
            for (set, phis) in &vectors[k] {
                let (p, r) = gold[k][set.child];
                let Some(gold_k) = model.gold_entry(set, p, r) else {
                    continue;
                };
                let scores = model.entry_scores(phis);
                let probs = softmax(&scores);
                total -= probs[gold_k].as_f64().max(f64::MIN_POSITIVE).ln();
                count += 1;
                for (e, &pr) in probs.iter().enumerate() {
                    let d = if e == gold_k { pr - T::one() } else { pr };
                    let (c, row) = (e / width, e % width);
                    let gw = grads.get_mut(model.weights).data_mut();
                    for &f in &phis[c].ids {
                        gw[row * cols + f] += d;
                    }
                    grads.get_mut(model.bias).data_mut()[row] += d;
                }
            }
            let w = model.store.get(model.weights).data();
            for (g, &x) in grads.get_mut(model.weights).data_mut().iter_mut().zip(w) {
                *g += l2 * x;
            }
            adam.update(&mut model.store, &grads);
        }
        let loss = if count == 0 {
            0.0
        } else {
            total / count as f64
        };
        let dev_f = (!dev.is_empty()).then(|| attachment_score(&model, dev));
        log.epochs.push(EpochStats {
            epoch,
            loss,
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
