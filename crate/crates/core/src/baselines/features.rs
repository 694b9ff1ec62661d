use crate::corpus::{Document, Kind, MetaNode, NodeRef, NodeType};

const QUOTE: &str = "\"";

/// Whether each token lies strictly inside a pair of quotation marks. An
/// unmatched opening mark runs to the end of its sentence.
pub fn quoted_tokens(doc: &Document) -> Vec<bool> {
    let mut inside = vec![false; doc.tokens.len()];
    for s in &doc.sentences {
        let mut open = false;
        for (tok, flag) in doc.tokens[s.start..s.end]
            .iter()
            .zip(&mut inside[s.start..s.end])
        {
            if tok.form == QUOTE {
                open = !open;
            } else {
                *flag = open;
            }
        }
    }
    inside
}

fn group3(t: NodeType) -> &'static str {
    match t.kind() {
        Kind::Time => "time",
        Kind::Event if t.is_stative() => "stative",
        Kind::Event => "eventive",
        Kind::Meta => "meta",
    }
}

fn group_rte(t: NodeType) -> &'static str {
    match t.kind() {
        _ if t == NodeType::Root => "root",
        Kind::Meta | Kind::Time => "time",
        Kind::Event => "event",
    }
}

fn group4(t: NodeType) -> &'static str {
    match t.kind() {
        _ if t == NodeType::Root => "root",
        Kind::Meta | Kind::Time => "time",
        _ => group3(t),
    }
}

fn distance_bucket(diff: i64) -> &'static str {
    match diff {
        i64::MIN..=0 => "<=0",
        1 => "1",
        2 => "2",
        3..=5 => "3-5",
        6..=10 => "6-10",
        _ => ">10",
    }
}

/// Names of the binary features active for attaching `child` to `cand`.
/// `quoted` comes from [`quoted_tokens`].
pub fn extract_features(
    doc: &Document,
    quoted: &[bool],
    child: usize,
    cand: NodeRef,
) -> Vec<String> {
    let c = &doc.nodes[child];
    let ct = c.node_type;
    let pt = doc.ref_type(cand);
    let mut f = vec![
        format!("type={}|{}", ct.name(), pt.name()),
        format!("group3={}|{}", group3(ct), group3(pt)),
        format!("group_rte={}|{}", group_rte(ct), group_rte(pt)),
        format!("group4={}|{}", group4(ct), group4(pt)),
    ];
    let is_root = cand == NodeRef::Meta(MetaNode::Root);
    if is_root && ct == NodeType::AbsoluteConcrete {
        f.push("absolute-time>root".into());
    }
    if is_root && c.kind() == Kind::Time {
        f.push("time>root".into());
    }

    let (diff, same_sent) = match cand {
        NodeRef::Meta(_) => (0, false),
        NodeRef::Text(j) => (child as i64 - j as i64, doc.nodes[j].sent == c.sent),
    };
    if let NodeRef::Text(j) = cand {
        let (lo, hi) = if j < child { (j, child) } else { (child, j) };
        if ct == NodeType::Event
            && pt == NodeType::Event
            && hi - lo > 1
            && (lo + 1..hi).all(|k| doc.nodes[k].node_type == NodeType::State)
        {
            f.push("states-between-events".into());
        }
    }
    if same_sent {
        f.push("same-sentence".into());
    }
    f.push(format!("distance={}", distance_bucket(diff)));
    if diff == 1 {
        f.push("adjacent".into());
    }

    if ct == NodeType::State && !same_sent {
        f.push("state&other-sentence".into());
    }
    if ct == NodeType::State && diff == 1 {
        f.push("state&adjacent".into());
    }
    if ct == NodeType::Event && pt == NodeType::Event && diff == 1 {
        f.push("event&event&adjacent".into());
    }
    let first_in_sent = child == 0 || doc.nodes[child - 1].sent != c.sent;
    if ct == NodeType::State && pt == NodeType::Event && diff == 1 && first_in_sent && c.sent != 0 {
        f.push("state&event&adjacent&sentence-initial".into());
    }

    if let NodeRef::Text(j) = cand {
        let inside = |i: usize| {
            let s = doc.nodes[i].span;
            (s.start..s.end).all(|t| quoted[t])
        };
        if inside(child) && inside(j) {
            f.push("both-quoted".into());
        }
    }
    f
}
