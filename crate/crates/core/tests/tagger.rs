use tdparse::corpus::{generate_synthetic, SynthParams};
use tdparse::tagger::{
    cross_validate_tagger, map_gold_edges, span_score, tag_train, TagTrainConfig, TaggerConfig,
};

fn small() -> TaggerConfig {
    TaggerConfig {
        word_dim: 16,
        pos_dim: 8,
        lstm_dim: 16,
        hidden_dim: 16,
    }
}

#[test]
fn loss_is_monotone_on_one_document() {
    let docs = generate_synthetic(
        &SynthParams {
            docs: 1,
            ..SynthParams::default()
        },
        4,
    )
    .unwrap();
    let cfg = TagTrainConfig {
        epochs: 40,
        unk_prob: 0.0,
        ..TagTrainConfig::default()
    };
    let (m, log) = tag_train::<f64>(&docs, &[], small(), &cfg, 1).unwrap();
    let l = log.losses();
    for (i, w) in l.windows(2).enumerate().skip(5) {
        assert!(
            w[1] <= w[0] + 1e-6,
            "loss rose after epoch {}: {} -> {}",
            i + 1,
            w[0],
            w[1]
        );
    }
    m.predict(&docs[0]).unwrap().validate().unwrap();
}

#[test]
fn same_seed_same_curve() {
    let docs = generate_synthetic(
        &SynthParams {
            docs: 3,
            ..SynthParams::default()
        },
        5,
    )
    .unwrap();
    let cfg = TagTrainConfig {
        epochs: 4,
        ..TagTrainConfig::default()
    };
    let run = || {
        let (m, log) = tag_train::<f64>(&docs[..2], &docs[2..], small(), &cfg, 3).unwrap();
        (log, m.to_checkpoint().to_bytes().unwrap())
    };
    let (a, b) = (run(), run());
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert!(a.0.epochs.iter().all(|e| e.dev.is_some()));
}

#[test]
fn fold_runner_covers_every_document() {
    let docs = generate_synthetic(
        &SynthParams {
            docs: 6,
            ..SynthParams::default()
        },
        6,
    )
    .unwrap();
    let cfg = TagTrainConfig {
        epochs: 2,
        ..TagTrainConfig::default()
    };
    let (pred, stats) = cross_validate_tagger::<f64>(&docs, 3, &small(), &cfg, 1).unwrap();
    assert_eq!(pred.len(), docs.len());
    for (p, d) in pred.iter().zip(&docs) {
        assert_eq!(p.id, d.id);
        p.validate().unwrap();
    }
    assert_eq!(
        stats.predicted,
        pred.iter().map(|d| d.nodes.len()).sum::<usize>()
    );
}

#[test]
fn gold_nodes_map_to_themselves() {
    for d in generate_synthetic(&SynthParams::default(), 7).unwrap() {
        let mut bare = d.clone();
        bare.edges.clear();
        let (m, s) = map_gold_edges(&d, &bare);
        assert_eq!(m.edges, d.edges);
        assert_eq!(s.matched, d.nodes.len());
    }
}

#[test]
fn overfits_one_document() {
    let docs = generate_synthetic(
        &SynthParams {
            docs: 1,
            ..SynthParams::default()
        },
        8,
    )
    .unwrap();
    let cfg = TagTrainConfig {
        epochs: 60,
        ..TagTrainConfig::default()
    };
    let (m, _) = tag_train::<f64>(&docs, &[], TaggerConfig::default(), &cfg, 2).unwrap();
    assert_eq!(span_score(&m, &docs).unwrap(), 1.0);
}
