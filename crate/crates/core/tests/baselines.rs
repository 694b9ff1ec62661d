use tdparse::baselines::{
    extract_features, logreg_train, quoted_tokens, simple_baseline, LogRegConfig, LogRegModel,
    LogRegTrainConfig,
};
use tdparse::corpus::{
    generate_synthetic, Domain, MetaNode, NodeRef, Relation, RelationProfile, SynthParams,
};
use tdparse::ranker::{attachment_score, decode, default_relation, Mode};
use tdparse::vocab::Vocab;

fn chain_corpus(docs: usize, seed: u64) -> Vec<tdparse::corpus::Document> {
    let p = SynthParams {
        docs,
        p_chain: 1.0,
        p_time: 0.0,
        profile: RelationProfile::single(Domain::News, Relation::Overlap),
        ..SynthParams::default()
    };
    generate_synthetic(&p, seed).unwrap()
}

#[test]
fn simple_baseline_is_exact_on_chain_corpus() {
    let docs = chain_corpus(20, 3);
    for d in &docs {
        let r = simple_baseline(d, default_relation(d));
        r.tree.check(d).unwrap();
        assert_eq!(r.apply(d).edges, d.edges);
    }
}

#[test]
fn separable_data_is_fit() {
    let docs = chain_corpus(10, 8);
    let cfg = LogRegTrainConfig {
        epochs: 200,
        ..LogRegTrainConfig::default()
    };
    let model_cfg = LogRegConfig {
        mode: Mode::Unlabeled,
        ..LogRegConfig::default()
    };
    let (m, log) = logreg_train::<f64>(&docs, &[], model_cfg, &cfg, 1).unwrap();
    assert_eq!(log.skipped, 0);
    assert_eq!(attachment_score(&m, &docs), 1.0);
}

#[test]
fn zero_weights_pick_first_candidate() {
    let docs = chain_corpus(1, 2);
    let m = LogRegModel::<f64>::new(LogRegConfig::default(), Vocab::new()).unwrap();
    let r = decode(&m, &docs[0]);
    for (i, dec) in r.decisions.iter().enumerate() {
        assert_eq!(dec.chosen, 0);
        let p0 = dec.probabilities[0];
        assert!(dec.probabilities.iter().all(|&p| (p - p0).abs() < 1e-15));
        assert_eq!(r.tree.parent(i), NodeRef::Meta(MetaNode::Root));
    }
}

#[test]
fn dct_weights_give_flat_tree() {
    let docs = generate_synthetic(&SynthParams::default(), 5).unwrap();
    let mut names = Vocab::new();
    for d in &docs {
        let q = quoted_tokens(d);
        for i in 0..d.nodes.len() {
            for c in tdparse::ranker::extract_candidates(d, i).candidates {
                for f in extract_features(d, &q, i, c) {
                    names.add(&f);
                }
            }
        }
    }
    let dct: Vec<String> = names
        .items()
        .iter()
        .filter(|n| n.ends_with("|dct") && n.starts_with("type="))
        .cloned()
        .collect();
    let mut m = LogRegModel::<f64>::new(
        LogRegConfig {
            mode: Mode::Unlabeled,
            ..LogRegConfig::default()
        },
        names,
    )
    .unwrap();
    for f in &dct {
        m.set_weight(f, 0, 10.0);
    }
    for d in &docs {
        let r = decode(&m, d);
        r.tree.check(d).unwrap();
        assert!(r
            .tree
            .entries()
            .iter()
            .all(|e| e.0 == NodeRef::Meta(MetaNode::Dct)));
    }
}

#[test]
fn training_is_deterministic() {
    let docs = generate_synthetic(&SynthParams::default(), 9).unwrap();
    let run = || {
        let (m, log) = logreg_train::<f64>(
            &docs[..8],
            &docs[8..],
            LogRegConfig::default(),
            &LogRegTrainConfig::default(),
            4,
        )
        .unwrap();
        (m.to_checkpoint().to_bytes().unwrap(), log.losses())
    };
    assert_eq!(run(), run());
}

#[test]
fn single_label_matches_unlabeled() {
    let docs = generate_synthetic(
        &SynthParams {
            docs: 20,
            ..SynthParams::default()
        },
        10,
    )
    .unwrap();
    let (u, _) = logreg_train::<f64>(
        &docs,
        &[],
        LogRegConfig {
            mode: Mode::Unlabeled,
            ..LogRegConfig::default()
        },
        &LogRegTrainConfig {
            epochs: 5,
            ..Default::default()
        },
        2,
    )
    .unwrap();
    let mut l = LogRegModel::<f64>::new(
        LogRegConfig {
            mode: Mode::Labeled,
            labels: vec![Relation::Overlap],
            relation_mask: true,
        },
        u.features().clone(),
    )
    .unwrap();
    l.store = u.store.clone();
    for d in &docs {
        assert_eq!(decode(&l, d).tree, decode(&u, d).tree);
    }
}

#[test]
fn empty_training_set_fails() {
    assert!(logreg_train::<f64>(
        &[],
        &[],
        LogRegConfig::default(),
        &LogRegTrainConfig::default(),
        0
    )
    .is_err());
}
