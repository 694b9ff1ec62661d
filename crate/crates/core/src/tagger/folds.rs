use std::collections::HashMap;

use super::mapping::{map_gold_edges, MappingStats};
use super::model::{tag_train, TagTrainConfig, TaggerConfig};
use crate::corpus::{kfold, Document};
use crate::{Result, Scalar};

/// Out-of-fold stage-1 predictions for every document, each carrying the
/// gold edges mapped onto its predicted nodes, in input order.
pub fn cross_validate_tagger<T: Scalar>(
    docs: &[Document],
    k: usize,
    model_config: &TaggerConfig,
    config: &TagTrainConfig,
    seed: u64,
) -> Result<(Vec<Document>, MappingStats)> {
    let position: HashMap<&str, usize> = docs
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.as_str(), i))
        .collect();
    let mut out: Vec<Option<Document>> = vec![None; docs.len()];
    let mut stats = MappingStats::default();
    for (fold, (train, test)) in kfold(docs, k, seed)?.into_iter().enumerate() {
        let (model, _) = tag_train::<T>(
            &train,
            &[],
            model_config.clone(),
            config,
            seed + fold as u64,
        )?;
        for d in &test {
            let (mapped, s) = map_gold_edges(d, &model.predict(d)?);
            stats.merge(s);
            out[position[d.id.as_str()]] = Some(mapped);
        }
    }
    Ok((
        out.into_iter()
            .map(|d| d.expect("every document is in one fold"))
            .collect(),
        stats,
    ))
}
