use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tdparse::corpus::{read_documents, Relation};

fn tdparse(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdparse"))
        .current_dir(dir)
        .env_remove("TDPARSE_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = tdparse(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn synth(dir: &Path, out: &str, seed: &str) {
    ok(
        dir,
        &["gen-synth", "--out", out, "--docs", "20", "--seed", seed],
    );
}

#[test]
fn gen_synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "a", "4");
    synth(dir.path(), "b", "4");
    for part in ["train", "dev", "test"] {
        let a = fs::read(dir.path().join("a").join(format!("{part}.jsonl"))).unwrap();
        let b = fs::read(dir.path().join("b").join(format!("{part}.jsonl"))).unwrap();
        assert_eq!(a, b, "{part}");
    }
    let train = read_documents(&dir.path().join("a/train.jsonl")).unwrap();
    assert_eq!(train.len(), 16);
}

#[test]
fn seed_comes_from_environment_when_no_flag() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "flag", "11");
    let out = Command::new(env!("CARGO_BIN_EXE_tdparse"))
        .current_dir(dir.path())
        .env("TDPARSE_SEED", "11")
        .args(["gen-synth", "--out", "env", "--docs", "20"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let a = fs::read(dir.path().join("flag/test.jsonl")).unwrap();
    let b = fs::read(dir.path().join("env/test.jsonl")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_ratios_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = tdparse(
        dir.path(),
        &["gen-synth", "--out", "x", "--ratios", "0.5,0.1,0.1"],
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("sum to 1"));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn unwritable_output_fails_before_generation() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("file"), "").unwrap();
    let out = tdparse(dir.path(), &["gen-synth", "--out", "file/sub"]);
    assert!(!out.status.success());
}

#[test]
fn eval_of_gold_copy_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d", "2");
    fs::copy(
        dir.path().join("d/test.jsonl"),
        dir.path().join("copy.jsonl"),
    )
    .unwrap();
    let table = ok(
        dir.path(),
        &[
            "eval",
            "--gold",
            "d/test.jsonl",
            "--pred",
            "copy.jsonl",
            "--json",
            "r.json",
        ],
    );
    for section in [
        "spans (all)",
        "unlabeled attachment",
        "labeled attachment",
        "parent locality",
        "relations",
    ] {
        assert!(table.contains(section), "missing {section}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["labeled"]["f1"], 1.0);
    assert_eq!(report["unlabeled"]["f1"], 1.0);
    assert_eq!(report["averaging"], "micro");
}

#[test]
fn eval_rejects_mismatched_documents() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d", "2");
    let out = tdparse(
        dir.path(),
        &["eval", "--gold", "d/test.jsonl", "--pred", "d/dev.jsonl"],
    );
    assert!(!out.status.success());
    let first = read_documents(&dir.path().join("d/test.jsonl"))
        .unwrap()
        .remove(0);
    assert!(stderr(&out).contains(&first.id));
}

#[test]
fn simple_parse_uses_domain_relation() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d", "6");
    ok(
        dir.path(),
        &[
            "parse",
            "--system",
            "simple",
            "--domain",
            "news",
            "--input",
            "d/test.jsonl",
            "--output",
            "p.jsonl",
        ],
    );
    let parsed = read_documents(&dir.path().join("p.jsonl")).unwrap();
    let gold = read_documents(&dir.path().join("d/test.jsonl")).unwrap();
    assert_eq!(parsed.len(), gold.len());
    for (p, g) in parsed.iter().zip(&gold) {
        assert_eq!(p.nodes, g.nodes);
        assert_eq!(p.edges.len(), g.nodes.len());
        assert!(p.edges.iter().all(|e| e.relation == Relation::Overlap));
    }
    ok(
        dir.path(),
        &[
            "parse",
            "--system",
            "simple",
            "--domain",
            "grimm",
            "--input",
            "d/test.jsonl",
            "--output",
            "q.jsonl",
        ],
    );
    let parsed = read_documents(&dir.path().join("q.jsonl")).unwrap();
    assert!(parsed
        .iter()
        .flat_map(|d| &d.edges)
        .all(|e| e.relation == Relation::Before));
}

#[test]
fn train_then_parse_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d", "3");
    let out = ok(
        dir.path(),
        &[
            "train",
            "--stage",
            "2",
            "--system",
            "neural",
            "--variant",
            "enriched",
            "--train",
            "d/train.jsonl",
            "--dev",
            "d/dev.jsonl",
            "--model",
            "m.json",
            "--epochs",
            "2",
            "--word-dim",
            "8",
            "--type-dim",
            "4",
            "--lstm-dim",
            "8",
            "--hidden-dim",
            "8",
        ],
    );
    assert!(out.contains("sha256: "));
    let log: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.json.log.json")).unwrap())
            .unwrap();
    assert_eq!(log["epochs"].as_array().unwrap().len(), 2);

    ok(
        dir.path(),
        &[
            "parse",
            "--system",
            "neural",
            "--model",
            "m.json",
            "--input",
            "d/test.jsonl",
            "--output",
            "p.jsonl",
            "--diagnostics",
            "diag.jsonl",
        ],
    );
    let parsed = read_documents(&dir.path().join("p.jsonl")).unwrap();
    let diag = fs::read_to_string(dir.path().join("diag.jsonl")).unwrap();
    assert_eq!(diag.lines().count(), parsed.len());

    let wrong = tdparse(
        dir.path(),
        &[
            "parse",
            "--system",
            "neural",
            "--variant",
            "attention",
            "--model",
            "m.json",
            "--input",
            "d/test.jsonl",
            "--output",
            "x.jsonl",
        ],
    );
    assert!(!wrong.status.success());
    let kind = tdparse(
        dir.path(),
        &[
            "parse",
            "--system",
            "logistic",
            "--model",
            "m.json",
            "--input",
            "d/test.jsonl",
            "--output",
            "x.jsonl",
        ],
    );
    assert!(!kind.status.success());
    assert!(stderr(&kind).contains("ranker"));
}

#[test]
fn config_file_supplies_paths_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d", "5");
    fs::write(
        dir.path().join("run.toml"),
        "seed = 3\ntrain = \"d/train.jsonl\"\ndev = \"d/dev.jsonl\"\nmodel = \"cfg.json\"\nepochs = 2\n",
    )
    .unwrap();
    ok(
        dir.path(),
        &[
            "--config", "run.toml", "train", "--stage", "2", "--system", "logistic",
        ],
    );
    assert!(dir.path().join("cfg.json").exists());
    ok(
        dir.path(),
        &[
            "--config",
            "run.toml",
            "train",
            "--stage",
            "2",
            "--system",
            "logistic",
            "--model",
            "flag.json",
        ],
    );
    assert_eq!(
        fs::read(dir.path().join("cfg.json")).unwrap(),
        fs::read(dir.path().join("flag.json")).unwrap()
    );

    fs::write(dir.path().join("bad.toml"), "sede = 3\n").unwrap();
    let out = tdparse(dir.path(), &["--config", "bad.toml", "eval", "--pred", "x"]);
    assert!(!out.status.success());
}

#[test]
fn simple_system_cannot_be_trained() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d", "1");
    let out = tdparse(
        dir.path(),
        &[
            "train",
            "--stage",
            "2",
            "--system",
            "simple",
            "--train",
            "d/train.jsonl",
            "--model",
            "m.json",
        ],
    );
    assert!(!out.status.success());
}

#[test]
fn pipeline_requires_tagger() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d", "1");
    let out = tdparse(
        dir.path(),
        &[
            "parse",
            "--system",
            "simple",
            "--pipeline",
            "--input",
            "d/test.jsonl",
            "--output",
            "p.jsonl",
        ],
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--tagger"));
}
