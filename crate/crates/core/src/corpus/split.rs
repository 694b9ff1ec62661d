use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Document, Domain};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Split {
    pub train: Vec<Document>,
    pub dev: Vec<Document>,
    pub test: Vec<Document>,
}

/// Seeded shuffle-and-cut into train/dev/test.
///
/// Sizes per stratum: `floor(n * train)`, `floor(n * dev)`, remainder to
/// test. Documents are stratified by `domain` when any carries one.
pub fn split_corpus(docs: &[Document], ratios: (f64, f64, f64), seed: u64) -> Result<Split> {
    let (rt, rd, rs) = ratios;
    if [rt, rd, rs].iter().any(|r| !(0.0..=1.0).contains(r)) || (rt + rd + rs - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split ratios {ratios:?} must be within [0, 1] and sum to 1"
        )));
    }
    if docs.len() < 3 {
        return Err(Error::Config(format!(
            "cannot split {} documents three ways",
            docs.len()
        )));
    }

    let mut strata: BTreeMap<Option<Domain>, Vec<usize>> = BTreeMap::new();
    for (i, d) in docs.iter().enumerate() {
        strata.entry(d.domain).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split::default();
    for (_, mut idx) in strata {
        idx.shuffle(&mut rng);
        let n = idx.len() as f64;
        let n_train = (n * rt + 1e-9).floor() as usize;
        let n_dev = ((n * rd + 1e-9).floor() as usize).min(idx.len() - n_train);
        for (k, &i) in idx.iter().enumerate() {
            let bucket = if k < n_train {
                &mut split.train
            } else if k < n_train + n_dev {
                &mut split.dev
            } else {
                &mut split.test
            };
            bucket.push(docs[i].clone());
        }
    }
    Ok(split)
}

/// Seeded `k`-fold partition: returns `(train, held_out)` per fold.
pub fn kfold(
    docs: &[Document],
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<Document>, Vec<Document>)>> {
    if k < 2 || k > docs.len() {
        return Err(Error::Config(format!(
            "{k}-fold split needs 2 <= k <= {} documents",
            docs.len()
        )));
    }
    let mut idx: Vec<usize> = (0..docs.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((0..k)
        .map(|fold| {
            let mut train = Vec::new();
            let mut held = Vec::new();
            for (pos, &i) in idx.iter().enumerate() {
                if pos % k == fold {
                    held.push(docs[i].clone());
                } else {
                    train.push(docs[i].clone());
                }
            }
            (train, held)
        })
        .collect())
}
