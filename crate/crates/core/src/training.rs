//! Epoch bookkeeping shared by the trainers.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::corpus::Document;
use crate::vocab::Vocab;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    /// Development score, when a development set was given.
    pub dev: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
    /// Epoch whose parameters were kept (1-based, 0 when none ran).
    pub best_epoch: usize,
    /// Training instances that could not be used.
    pub skipped: usize,
}

impl TrainLog {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.loss).collect()
    }
}

/// Keeps the best snapshot and signals when `patience` epochs passed without
/// improvement.
pub(crate) struct EarlyStopping<S> {
    patience: usize,
    best: Option<(f64, usize, S)>,
    since: usize,
}

impl<S> EarlyStopping<S> {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
            since: 0,
        }
    }

    /// Records an epoch's score; returns true when training should stop.
    pub fn observe(&mut self, epoch: usize, score: f64, snapshot: impl FnOnce() -> S) -> bool {
        if self.best.as_ref().is_none_or(|b| score > b.0) {
            self.best = Some((score, epoch, snapshot()));
            self.since = 0;
        } else {
            self.since += 1;
        }
        self.since >= self.patience
    }

    pub fn into_best(self) -> Option<(usize, S)> {
        self.best.map(|(_, e, s)| (e, s))
    }
}

/// Word counts over the training tokens.
pub(crate) fn singletons(docs: &[Document]) -> HashMap<String, usize> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for d in docs {
        for t in &d.tokens {
            *counts.entry(t.form.clone()).or_default() += 1;
        }
    }
    counts.retain(|_, c| *c == 1);
    counts
}

/// Vocabulary ids for `doc`, replacing singleton words by UNK with
/// probability `p`.
pub(crate) fn noisy_ids<R: Rng>(
    vocab: &Vocab,
    doc: &Document,
    singletons: &HashMap<String, usize>,
    p: f64,
    rng: &mut R,
) -> Vec<usize> {
    doc.tokens
        .iter()
        .map(|t| {
            if p > 0.0 && singletons.contains_key(&t.form) && rng.gen_bool(p) {
                vocab.unk()
            } else {
                vocab.get(&t.form)
            }
        })
        .collect()
}
