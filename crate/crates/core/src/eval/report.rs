use std::fmt::Write;

use serde::Serialize;

use super::confusion::{
    parent_locality_confusion, relation_confusion, ConfusionMatrix, LocalityConfusion,
};
use super::prf::{attachment_prf, span_prf, Prf, SpanMode, SpanScores};
use crate::corpus::Document;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub averaging: &'static str,
    pub documents: usize,
    pub span_all: SpanScores,
    pub span_binary: SpanScores,
    pub span_exact: SpanScores,
    pub unlabeled: Prf,
    pub labeled: Prf,
    pub locality: LocalityConfusion,
    pub relations: ConfusionMatrix,
}

pub fn evaluate(pairs: &[(&Document, &Document)]) -> EvalReport {
    EvalReport {
        averaging: "micro",
        documents: pairs.len(),
        span_all: span_prf(pairs, SpanMode::AllSpan),
        span_binary: span_prf(pairs, SpanMode::Binary),
        span_exact: span_prf(pairs, SpanMode::Exact),
        unlabeled: attachment_prf(pairs, false),
        labeled: attachment_prf(pairs, true),
        locality: parent_locality_confusion(pairs),
        relations: relation_confusion(pairs),
    }
}

fn row(out: &mut String, name: &str, p: &Prf) {
    let _ = writeln!(
        out,
        "{name:<22}{:>8.4}{:>8.4}{:>8.4}{:>9}{:>9}{:>9}",
        p.precision(),
        p.recall(),
        p.f1(),
        p.correct,
        p.predicted,
        p.gold
    );
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} documents, {}-averaged scores",
            self.documents, self.averaging
        );
        let _ = writeln!(
            out,
            "{:<22}{:>8}{:>8}{:>8}{:>9}{:>9}{:>9}",
            "", "p", "r", "f", "correct", "pred", "gold"
        );
        row(&mut out, "spans (all)", &self.span_all.overall);
        row(&mut out, "spans (time/event)", &self.span_binary.overall);
        for (label, p) in &self.span_binary.by_label {
            row(&mut out, &format!("  {label}"), p);
        }
        row(&mut out, "spans (exact type)", &self.span_exact.overall);
        for (label, p) in &self.span_exact.by_label {
            row(&mut out, &format!("  {label}"), p);
        }
        row(&mut out, "unlabeled attachment", &self.unlabeled);
        row(&mut out, "labeled attachment", &self.labeled);
        let _ = writeln!(
            out,
            "\nparent locality (event children, coverage {}/{})",
            self.locality.evaluated, self.locality.gold_children
        );
        out.push_str(&self.locality.matrix.to_table("gold\\pred"));
        let _ = writeln!(out, "\nrelations (correctly attached children)");
        out.push_str(&self.relations.to_table("gold\\pred"));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
