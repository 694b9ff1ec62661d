use proptest::prelude::*;
use tdparse::corpus::{generate_synthetic, Document, NodeType, Span, SynthParams};
use tdparse::eval::{align, attachment_prf, evaluate, span_prf, Prf, SpanMode};
use tdparse::ranker::{decode, RankerConfig, RankerModel};
use tdparse::vocab::Vocab;

proptest! {
    #[test]
    fn prf_is_bounded(correct in 0usize..50, extra_p in 0usize..50, extra_g in 0usize..50) {
        let p = Prf::new(correct, correct + extra_p, correct + extra_g);
        for x in [p.precision(), p.recall(), p.f1()] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        let (lo, hi) = (p.precision().min(p.recall()), p.precision().max(p.recall()));
        prop_assert!(p.f1() >= lo - 1e-12 && p.f1() <= hi + 1e-12);
    }

    #[test]
    fn overall_is_sum_of_labels(seed in 0u64..500, drop in 0usize..4, shift in any::<bool>()) {
        let gold = generate_synthetic(&SynthParams { docs: 2, ..SynthParams::default() }, seed).unwrap();
        let pred: Vec<Document> = gold.iter().map(|d| {
            let mut p = d.clone();
            let mut spans: Vec<(Span, NodeType)> = d.nodes.iter().skip(drop).map(|n| (n.span, n.node_type)).collect();
            if shift {
                if let Some(s) = spans.first_mut() {
                    s.1 = NodeType::Habitual;
                }
            }
            p.set_nodes(spans).unwrap();
            p
        }).collect();
        let pairs = align(&gold, &pred).unwrap();
        for mode in [SpanMode::Exact, SpanMode::Binary, SpanMode::AllSpan] {
            let s = span_prf(&pairs, mode);
            let mut sum = Prf::default();
            for v in s.by_label.values() {
                sum.merge(*v);
            }
            prop_assert_eq!(sum, s.overall);
        }
    }
}

#[test]
fn gold_spans_give_equal_p_and_r() {
    let gold = generate_synthetic(
        &SynthParams {
            docs: 5,
            ..SynthParams::default()
        },
        3,
    )
    .unwrap();
    let vocab = Vocab::build(
        gold.iter()
            .flat_map(|d| d.tokens.iter().map(|t| t.form.as_str())),
    );
    let m = RankerModel::<f64>::new(RankerConfig::default(), vocab, 1).unwrap();
    let pred: Vec<Document> = gold.iter().map(|d| decode(&m, d).apply(d)).collect();
    let pairs = align(&gold, &pred).unwrap();
    for labeled in [false, true] {
        let p = attachment_prf(&pairs, labeled);
        assert_eq!(p.predicted, p.gold);
        assert_eq!(p.precision(), p.recall());
        assert_eq!(p.precision(), p.f1());
    }
}

#[test]
fn perfect_copy_scores_one() {
    let gold = generate_synthetic(&SynthParams::default(), 4).unwrap();
    let r = evaluate(&align(&gold, &gold).unwrap());
    assert_eq!(r.labeled.f1(), 1.0);
    assert_eq!(r.span_exact.overall.f1(), 1.0);
    let t = r.to_table();
    assert!(t.contains("parent locality") && t.contains("relations"));
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["averaging"], "micro");
}

#[test]
fn mismatched_ids_are_listed() {
    let gold = generate_synthetic(
        &SynthParams {
            docs: 2,
            ..SynthParams::default()
        },
        4,
    )
    .unwrap();
    let mut pred = gold.clone();
    pred[1].id = "other".into();
    let err = align(&gold, &pred).unwrap_err().to_string();
    assert!(err.contains(&gold[1].id) && err.contains("other"), "{err}");
}
