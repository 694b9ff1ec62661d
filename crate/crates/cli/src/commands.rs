use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tdparse::autodiff::checkpoint::peek_kind;
use tdparse::baselines::{logreg_train, simple_baseline, LogRegConfig, LogRegTrainConfig};
use tdparse::corpus::{
    generate_synthetic, read_documents, split_corpus, write_documents, Document, Domain,
    RelationProfile, SynthParams,
};
use tdparse::eval::{align, evaluate};
use tdparse::ranker::{
    decode, rank_train, CandidateScorer, ParseResult, RankTrainConfig, RankerConfig,
};
use tdparse::tagger::{
    cross_validate_tagger, tag_predict, tag_train, PosTagger, TagTrainConfig, TaggerConfig,
};
use tdparse::training::TrainLog;
use tdparse::{LogReg, Ranker, Tagger};

use crate::config::RunConfig;
use crate::{Cli, Command, EvalArgs, Format, GenSynthArgs, ParseArgs, System, TrainArgs};

pub fn run(cli: Cli) -> Result<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::GenSynth(a) => gen_synth(&config, a),
        Command::Train(a) => train(&config, a),
        Command::Parse(a) => parse(&config, a),
        Command::Eval(a) => eval(&config, a),
    }
}

fn required(flag: Option<PathBuf>, config: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or_else(|| config.clone())
        .ok_or_else(|| anyhow!("no {what} given (flag --{what} or config key '{what}')"))
}

fn read(path: &Path) -> Result<Vec<Document>> {
    Ok(read_documents(path)?)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            bail!("output directory {} does not exist", p.display())
        }
        _ => Ok(()),
    }
}

fn gen_synth(config: &RunConfig, a: GenSynthArgs) -> Result<()> {
    let seed = config.seed(a.seed)?;
    let domain = a.domain.or(config.domain).unwrap_or(Domain::News);
    let profile = match a.single_relation {
        Some(tdparse::corpus::Relation::DependOn) => {
            bail!("depend-on cannot label event edges; pick another relation")
        }
        Some(r) => RelationProfile::single(domain, r),
        None => RelationProfile::for_domain(domain),
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let paths: Vec<PathBuf> = ["train", "dev", "test"]
        .iter()
        .map(|s| a.out.join(format!("{s}.jsonl")))
        .collect();
    for p in &paths {
        fs::File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let params = SynthParams {
        docs: a.docs,
        p_chain: a.p_chain,
        cue_rate: a.cue_rate,
        profile,
        ..SynthParams::default()
    };
    let docs = generate_synthetic(&params, seed)?;
    let split = split_corpus(&docs, a.ratios, seed)?;
    for (p, part) in paths.iter().zip([&split.train, &split.dev, &split.test]) {
        write_documents(p, part)?;
        println!("{}: {} documents", p.display(), part.len());
    }
    Ok(())
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn finish_training(
    model_path: &Path,
    log_path: Option<PathBuf>,
    bytes: Vec<u8>,
    log: &TrainLog,
) -> Result<()> {
    fs::write(model_path, &bytes).with_context(|| format!("writing {}", model_path.display()))?;
    let log_path = log_path.unwrap_or_else(|| {
        let mut s = model_path.as_os_str().to_owned();
        s.push(".log.json");
        PathBuf::from(s)
    });
    fs::write(&log_path, serde_json::to_string_pretty(log)? + "\n")
        .with_context(|| format!("writing {}", log_path.display()))?;
    for e in &log.epochs {
        match e.dev {
            Some(f) => eprintln!("epoch {:>3}  loss {:.6}  dev f {:.4}", e.epoch, e.loss, f),
            None => eprintln!("epoch {:>3}  loss {:.6}", e.epoch, e.loss),
        }
    }
    if log.skipped > 0 {
        eprintln!("skipped {} training instances", log.skipped);
    }
    println!("best epoch: {}", log.best_epoch);
    println!("checkpoint: {}", model_path.display());
    println!("sha256: {}", digest(&bytes));
    Ok(())
}

fn tagger_config(config: &RunConfig, a: &TrainArgs) -> TaggerConfig {
    let d = TaggerConfig::default();
    let s = &config.tagger;
    TaggerConfig {
        word_dim: a.word_dim.or(s.word_dim).unwrap_or(d.word_dim),
        pos_dim: a.pos_dim.or(s.pos_dim).unwrap_or(d.pos_dim),
        lstm_dim: a.lstm_dim.or(s.lstm_dim).unwrap_or(d.lstm_dim),
        hidden_dim: a.hidden_dim.or(s.hidden_dim).unwrap_or(d.hidden_dim),
    }
}

fn ranker_config(config: &RunConfig, a: &TrainArgs) -> RankerConfig {
    let d = RankerConfig::default();
    let s = &config.ranker;
    RankerConfig {
        word_dim: a.word_dim.or(s.word_dim).unwrap_or(d.word_dim),
        type_dim: a.type_dim.or(s.type_dim).unwrap_or(d.type_dim),
        lstm_dim: a.lstm_dim.or(s.lstm_dim).unwrap_or(d.lstm_dim),
        hidden_dim: a.hidden_dim.or(s.hidden_dim).unwrap_or(d.hidden_dim),
        context_margin: a
            .context_margin
            .or(s.context_margin)
            .unwrap_or(d.context_margin),
        variant: a.variant.or(config.variant).unwrap_or(d.variant),
        mode: a.mode.or(config.mode).unwrap_or(d.mode),
        ..d
    }
}

fn train(config: &RunConfig, a: TrainArgs) -> Result<()> {
    let seed = config.seed(a.seed)?;
    let train_path = required(a.train.clone(), &config.train, "train")?;
    let model_path = required(a.model.clone(), &config.model, "model")?;
    let dev_path = a.dev.clone().or_else(|| config.dev.clone());
    ensure_parent(&model_path)?;
    if let Some(l) = &a.log {
        ensure_parent(l)?;
    }
    let train_docs = read(&train_path)?;
    let dev_docs = match &dev_path {
        Some(p) => read(p)?,
        None => Vec::new(),
    };
    let epochs = a.epochs.or(config.epochs);
    let patience = a.patience.or(config.patience);
    let lr = a.learning_rate.or(config.learning_rate);

    if a.stage == 1 {
        let model_cfg = tagger_config(config, &a);
        model_cfg.validate()?;
        let d = TagTrainConfig::default();
        let cfg = TagTrainConfig {
            epochs: epochs.unwrap_or(d.epochs),
            patience: patience.unwrap_or(d.patience),
            adam: tdparse::autodiff::AdamConfig {
                learning_rate: lr.unwrap_or(d.adam.learning_rate),
                ..d.adam
            },
            ..d
        };
        let (model, log) = tag_train::<f64>(&train_docs, &dev_docs, model_cfg, &cfg, seed)?;
        return finish_training(&model_path, a.log, model.to_checkpoint().to_bytes()?, &log);
    }

    let train_docs = match a.auto_spans {
        Some(k) => {
            let tcfg = tagger_config(config, &a);
            let (docs, stats) = cross_validate_tagger::<f64>(
                &train_docs,
                k,
                &tcfg,
                &TagTrainConfig::default(),
                seed,
            )?;
            eprintln!("span mapping: {}", serde_json::to_string(&stats)?);
            docs
        }
        None => train_docs,
    };
    match a.system {
        System::Neural => {
            let model_cfg = ranker_config(config, &a);
            model_cfg.validate()?;
            let d = RankTrainConfig::default();
            let cfg = RankTrainConfig {
                epochs: epochs.unwrap_or(d.epochs),
                patience: patience.unwrap_or(d.patience),
                adam: tdparse::autodiff::AdamConfig {
                    learning_rate: lr.unwrap_or(d.adam.learning_rate),
                    ..d.adam
                },
                ..d
            };
            let (model, log) = rank_train::<f64>(&train_docs, &dev_docs, model_cfg, &cfg, seed)?;
            finish_training(&model_path, a.log, model.to_checkpoint().to_bytes()?, &log)
        }
        System::Logistic => {
            let model_cfg = LogRegConfig {
                mode: a
                    .mode
                    .or(config.mode)
                    .unwrap_or(LogRegConfig::default().mode),
                ..LogRegConfig::default()
            };
            let d = LogRegTrainConfig::default();
            let cfg = LogRegTrainConfig {
                epochs: epochs.unwrap_or(d.epochs),
                patience: patience.unwrap_or(d.patience),
                adam: tdparse::autodiff::AdamConfig {
                    learning_rate: lr.unwrap_or(d.adam.learning_rate),
                    ..d.adam
                },
                ..d
            };
            let (model, log) = logreg_train::<f64>(&train_docs, &dev_docs, model_cfg, &cfg, seed)?;
            finish_training(&model_path, a.log, model.to_checkpoint().to_bytes()?, &log)
        }
        System::Simple => bail!("the simple system has nothing to train"),
    }
}

#[derive(Serialize)]
struct DecisionRecord {
    child: i64,
    candidates: Vec<i64>,
    probabilities: Vec<f64>,
    chosen: usize,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    id: &'a str,
    decisions: Vec<DecisionRecord>,
}

fn diagnostics(doc: &Document, r: &ParseResult) -> Result<String> {
    let decisions = r
        .decisions
        .iter()
        .zip(&doc.nodes)
        .map(|(d, n)| DecisionRecord {
            child: n.id.0,
            candidates: d.candidates.iter().map(|&c| doc.ref_id(c).0).collect(),
            probabilities: d.probabilities.clone(),
            chosen: d.chosen,
        })
        .collect();
    Ok(serde_json::to_string(&Diagnostics {
        id: &doc.id,
        decisions,
    })?)
}

fn load_checked(path: &Path, want: &str, system: &str) -> Result<()> {
    let kind = peek_kind(path)?;
    if kind != want {
        bail!(
            "checkpoint {} holds a {kind} model but --system {system} needs a {want} model",
            path.display()
        );
    }
    Ok(())
}

fn parse(config: &RunConfig, a: ParseArgs) -> Result<()> {
    let input = required(a.input.clone(), &config.test, "input")?;
    let output = required(a.output.clone(), &config.output, "output")?;
    ensure_parent(&output)?;
    let mut docs = read(&input)?;
    if let Some(p) = &a.fallback_pos {
        let tagger = PosTagger::train(&read(p)?);
        docs = docs.iter().map(|d| tagger.retag(d)).collect();
    }
    if a.pipeline {
        let path = a
            .tagger
            .as_deref()
            .ok_or_else(|| anyhow!("--pipeline needs a --tagger checkpoint"))?;
        load_checked(path, tdparse::tagger::CHECKPOINT_KIND, "pipeline")?;
        docs = tag_predict(&Tagger::load(path)?, &docs)?;
    }

    let scorer: Option<Box<dyn CandidateScorer>> = match a.system {
        System::Simple => None,
        System::Neural => {
            let path = required(a.model.clone(), &config.model, "model")?;
            load_checked(&path, tdparse::ranker::CHECKPOINT_KIND, "neural")?;
            let m = Ranker::load(&path)?;
            if let Some(v) = a.variant.or(config.variant) {
                if v != m.config().variant {
                    bail!(
                        "checkpoint {} is a {:?} ranker, not {:?}",
                        path.display(),
                        m.config().variant,
                        v
                    );
                }
            }
            Some(Box::new(m))
        }
        System::Logistic => {
            let path = required(a.model.clone(), &config.model, "model")?;
            load_checked(&path, tdparse::baselines::CHECKPOINT_KIND, "logistic")?;
            Some(Box::new(LogReg::load(&path)?))
        }
    };
    let domain = a.domain.or(config.domain);
    let mut parsed = Vec::with_capacity(docs.len());
    let mut diag = String::new();
    for doc in &docs {
        let r = match &scorer {
            Some(s) => decode(s.as_ref(), doc),
            None => {
                let rel = domain
                    .or(doc.domain)
                    .unwrap_or(Domain::News)
                    .default_relation();
                simple_baseline(doc, rel)
            }
        };
        if a.diagnostics.is_some() {
            diag.push_str(&diagnostics(doc, &r)?);
            diag.push('\n');
        }
        parsed.push(r.apply(doc));
    }
    write_documents(&output, &parsed)?;
    if let Some(p) = &a.diagnostics {
        fs::write(p, diag).with_context(|| format!("writing {}", p.display()))?;
    }
    println!("{}: {} documents", output.display(), parsed.len());
    Ok(())
}

fn eval(config: &RunConfig, a: EvalArgs) -> Result<()> {
    let gold_path = required(a.gold.clone(), &config.test, "gold")?;
    let gold = read(&gold_path)?;
    let pred = read(&a.pred)?;
    let report = evaluate(&align(&gold, &pred)?);
    match a.format {
        Format::Table => print!("{}", report.to_table()),
        Format::Json => println!("{}", report.to_json()),
    }
    if let Some(p) = &a.json {
        fs::write(p, report.to_json() + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
