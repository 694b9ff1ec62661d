use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdparse::corpus::{generate_synthetic, Document, Kind, NodeRef, Relation, SynthParams};
use tdparse::ranker::{
    candidate_sets, decode, rank_train, CandidateScorer, Mode, RankTrainConfig, RankerConfig,
    RankerModel, Variant, WINDOW_AFTER,
};
use tdparse::vocab::Vocab;

fn corpus(docs: usize, seed: u64) -> Vec<Document> {
    generate_synthetic(
        &SynthParams {
            docs,
            ..SynthParams::default()
        },
        seed,
    )
    .unwrap()
}

fn small(variant: Variant, mode: Mode) -> RankerConfig {
    RankerConfig {
        word_dim: 8,
        type_dim: 4,
        lstm_dim: 8,
        hidden_dim: 8,
        variant,
        mode,
        ..RankerConfig::default()
    }
}

/// A model whose parameters are drawn uniformly from [-scale, scale].
fn random_model(cfg: RankerConfig, docs: &[Document], seed: u64, scale: f64) -> RankerModel<f64> {
    let vocab = Vocab::build(
        docs.iter()
            .flat_map(|d| d.tokens.iter().map(|t| t.form.as_str())),
    );
    let mut m = RankerModel::<f64>::new(cfg, vocab, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<_> = m.store.ids().collect();
    for id in ids {
        for x in m.store.get_mut(id).data_mut() {
            *x = rng.gen_range(-scale..scale);
        }
    }
    m
}

fn assert_structure(doc: &Document, parsed: &Document) {
    let tree = tdparse::corpus::TemporalTree::from_document(parsed).unwrap();
    for (i, &(p, _)) in tree.entries().iter().enumerate() {
        if let NodeRef::Text(j) = p {
            assert!(doc.nodes[j].sent <= doc.nodes[i].sent + WINDOW_AFTER);
            if doc.nodes[i].kind() == Kind::Time {
                assert_eq!(doc.nodes[j].kind(), Kind::Time);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_parameters_decode_to_valid_trees(doc_seed in 0u64..1000, seed in 0u64..1000, v in 0usize..3, labeled in any::<bool>()) {
        let docs = corpus(2, doc_seed);
        let variant = [Variant::Basic, Variant::Enriched, Variant::Attention][v];
        let mode = if labeled { Mode::Labeled } else { Mode::Unlabeled };
        let m = random_model(small(variant, mode), &docs, seed, 1.5);
        for d in &docs {
            let r = decode(&m, d);
            for dec in &r.decisions {
                let total: f64 = dec.probabilities.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }
            assert_structure(d, &r.apply(d));
        }
    }
}

#[test]
fn single_label_reduces_to_unlabeled() {
    let docs = corpus(10, 31);
    for variant in [Variant::Basic, Variant::Enriched, Variant::Attention] {
        let u = random_model(small(variant, Mode::Unlabeled), &docs, 4, 0.5);
        let mut cfg = small(variant, Mode::Labeled);
        cfg.labels = vec![Relation::Overlap];
        let mut l = RankerModel::<f64>::new(cfg, u.vocab().clone(), 0).unwrap();
        l.store = u.store.clone();
        for d in &docs {
            assert_eq!(decode(&l, d).tree, decode(&u, d).tree);
        }
    }
}

#[test]
fn score_shift_keeps_argmax() {
    let docs = corpus(3, 2);
    let m = random_model(small(Variant::Enriched, Mode::Labeled), &docs, 1, 0.5);
    for d in &docs {
        let sets = candidate_sets(d);
        let scores = m.score_document(d, &sets);
        let shifted: Vec<Vec<f64>> = scores
            .iter()
            .map(|s| s.iter().map(|x| x + 7.25).collect())
            .collect();
        let a = tdparse::ranker::greedy_decode(d, &sets, &scores, m.labels(), true);
        let b = tdparse::ranker::greedy_decode(d, &sets, &shifted, m.labels(), true);
        assert_eq!(a.tree, b.tree);
    }
}

#[test]
fn training_is_reproducible_and_skips_nothing() {
    let docs = corpus(4, 12);
    let cfg = RankTrainConfig {
        epochs: 3,
        ..RankTrainConfig::default()
    };
    let run = || {
        let (m, log) = rank_train::<f64>(
            &docs[..3],
            &docs[3..],
            small(Variant::Attention, Mode::Labeled),
            &cfg,
            6,
        )
        .unwrap();
        assert_eq!(log.skipped, 0);
        (log.losses(), m.to_checkpoint().to_bytes().unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn training_lowers_loss() {
    let docs = corpus(3, 13);
    let cfg = RankTrainConfig {
        epochs: 20,
        ..RankTrainConfig::default()
    };
    let (_, log) = rank_train::<f64>(
        &docs,
        &[],
        small(Variant::Enriched, Mode::Unlabeled),
        &cfg,
        1,
    )
    .unwrap();
    let l = log.losses();
    assert!(l[l.len() - 1] < l[0]);
    assert_eq!(log.best_epoch, 20);
}

#[test]
fn empty_training_set_fails() {
    let r = rank_train::<f64>(
        &[],
        &[],
        RankerConfig::default(),
        &RankTrainConfig::default(),
        0,
    );
    assert!(matches!(r, Err(tdparse::Error::EmptyTrainingSet)));
}

#[test]
fn f32_models_decode() {
    let docs = corpus(2, 3);
    let vocab = Vocab::build(
        docs.iter()
            .flat_map(|d| d.tokens.iter().map(|t| t.form.as_str())),
    );
    let m = RankerModel::<f32>::new(small(Variant::Attention, Mode::Labeled), vocab, 2).unwrap();
    for d in &docs {
        decode(&m, d).tree.check(d).unwrap();
    }
}
