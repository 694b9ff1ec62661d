use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::decode::{decode, CandidateScorer};
use super::model::{RankerConfig, RankerModel};
use crate::autodiff::{Adam, AdamConfig, Graph};
use crate::corpus::{Document, NodeRef, Relation, TemporalTree};
use crate::eval::attachment_prf;
use crate::training::{noisy_ids, singletons, EarlyStopping, EpochStats, TrainLog};
use crate::vocab::Vocab;
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankTrainConfig {
    pub epochs: usize,
    pub patience: usize,
    pub adam: AdamConfig,
    /// Probability of replacing a singleton training word by UNK.
    pub unk_prob: f64,
}

impl Default for RankTrainConfig {
    fn default() -> Self {
        RankTrainConfig {
            epochs: 100,
            patience: 5,
            adam: AdamConfig::default(),
            unk_prob: 0.25,
        }
    }
}

/// Gold parent entries for every training document.
pub(crate) fn gold_trees(docs: &[Document]) -> Result<Vec<Vec<(NodeRef, Relation)>>> {
    docs.iter()
        .map(|d| {
            if d.nodes.is_empty() {
                return Ok(Vec::new());
            }
            if d.edges.is_empty() {
                return Err(Error::Precondition(format!(
                    "training document {} has no gold tree",
                    d.id
                )));
            }
            Ok(TemporalTree::from_document(d)?.entries().to_vec())
        })
        .collect()
}

/// Attachment f of `scorer` on `docs`; labeled when the scorer is.
pub fn attachment_score<S: CandidateScorer + ?Sized>(scorer: &S, docs: &[Document]) -> f64 {
    let parsed: Vec<Document> = docs.iter().map(|d| decode(scorer, d).apply(d)).collect();
    let pairs: Vec<_> = docs.iter().zip(&parsed).collect();
    attachment_prf(&pairs, scorer.labels().is_some()).f1()
}

/// Trains a ranker with Adam, one update per document, keeping the
/// parameters with the best development attachment f.
pub fn rank_train<T: Scalar>(
    train: &[Document],
    dev: &[Document],
    model_config: RankerConfig,
    config: &RankTrainConfig,
    seed: u64,
) -> Result<(RankerModel<T>, TrainLog)> {
    if train.iter().all(|d| d.nodes.is_empty()) {
        return Err(Error::EmptyTrainingSet);
    }
    let gold = gold_trees(train)?;
    let vocab = Vocab::build(
        train
            .iter()
            .flat_map(|d| d.tokens.iter().map(|t| t.form.as_str())),
    );
    let mut model = RankerModel::<T>::new(model_config, vocab, seed)?;
    let rare = singletons(train);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut adam = Adam::new(&model.store, config.adam);
    let mut stop = EarlyStopping::new(config.patience.max(1));
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut count) = (0.0, 0usize);
        for &k in &order {
            let doc = &train[k];
            if doc.nodes.is_empty() {
                continue;
            }
            let words = noisy_ids(model.vocab(), doc, &rare, config.unk_prob, &mut rng);
            let mut g = Graph::new(&model.store);
            let (loss, skipped) = model.document_loss(&mut g, doc, &gold[k], &words);
            if epoch == 1 {
                log.skipped += skipped;
            }
            let Some(loss) = loss else { continue };
            total += g.value(loss).data()[0].as_f64();
            count += doc.nodes.len() - skipped;
            let grads = g.backward(loss)?;
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
