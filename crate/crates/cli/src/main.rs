//! `tdparse`: synthetic data, training, parsing and evaluation for temporal
//! dependency trees.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tdparse::corpus::{Domain, Relation};
use tdparse::ranker::{Mode, Variant};

use config::parse_named;

#[derive(Parser, Debug)]
#[command(
    name = "tdparse",
    version,
    about = "Temporal dependency parsing toolkit"
)]
pub struct Cli {
    /// TOML file with default settings (flags override it).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic corpus with train/dev/test splits.
    GenSynth(GenSynthArgs),
    /// Train the tagger (stage 1) or a parser (stage 2).
    Train(TrainArgs),
    /// Parse documents into temporal dependency trees.
    Parse(ParseArgs),
    /// Score predicted documents against gold ones.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct GenSynthArgs {
    /// Directory receiving train.jsonl, dev.jsonl and test.jsonl.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Number of documents.
    #[arg(long, default_value_t = 100)]
    pub docs: usize,
    /// Probability that a node attaches to the immediately preceding node.
    #[arg(long, default_value_t = 0.7, value_parser = parse_probability)]
    pub p_chain: f64,
    /// news or grimm; selects the relation distribution.
    #[arg(long, value_parser = parse_named::<Domain>)]
    pub domain: Option<Domain>,
    /// Give every edge this relation.
    #[arg(long, value_parser = parse_named::<Relation>)]
    pub single_relation: Option<Relation>,
    /// Probability that each planted cue word is emitted.
    #[arg(long, default_value_t = 1.0, value_parser = parse_probability)]
    pub cue_rate: f64,
    /// Train/dev/test fractions, comma separated.
    #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_ratios)]
    pub ratios: (f64, f64, f64),
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    /// Bi-LSTM ranking parser.
    Neural,
    /// Logistic-regression ranker.
    Logistic,
    /// Previous-node heuristic (parse only).
    Simple,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// 1 trains the span tagger, 2 a parser.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub stage: u8,
    #[arg(long, value_enum, default_value_t = System::Neural)]
    pub system: System,
    /// basic, enriched or attention.
    #[arg(long, value_parser = parse_named::<Variant>)]
    pub variant: Option<Variant>,
    /// unlabeled or labeled.
    #[arg(long, value_parser = parse_named::<Mode>)]
    pub mode: Option<Mode>,
    /// Training documents (JSONL).
    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
    /// Development documents for early stopping.
    #[arg(long, value_name = "FILE")]
    pub dev: Option<PathBuf>,
    /// Checkpoint to write.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Training log (defaults to the checkpoint path plus `.log.json`).
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stage 2: train on spans predicted by k-fold stage-1 runs.
    #[arg(long, value_name = "K")]
    pub auto_spans: Option<usize>,
    #[arg(long)]
    pub word_dim: Option<usize>,
    /// Stage 1 only.
    #[arg(long)]
    pub pos_dim: Option<usize>,
    /// Stage 2 only.
    #[arg(long)]
    pub type_dim: Option<usize>,
    #[arg(long)]
    pub lstm_dim: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    /// Stage 2 attention: tokens of context on each side of a span.
    #[arg(long)]
    pub context_margin: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    /// Documents to parse (JSONL).
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Where the parsed documents go.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = System::Neural)]
    pub system: System,
    /// Parser checkpoint (neural or logistic systems).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Expected ranker variant; checked against the checkpoint.
    #[arg(long, value_parser = parse_named::<Variant>)]
    pub variant: Option<Variant>,
    /// Tagger checkpoint for `--pipeline`.
    #[arg(long, value_name = "FILE")]
    pub tagger: Option<PathBuf>,
    /// Replace input nodes by tagger predictions before parsing.
    #[arg(long, conflicts_with = "gold_spans")]
    pub pipeline: bool,
    /// Parse over the nodes given in the input (the default).
    #[arg(long)]
    pub gold_spans: bool,
    /// Retag POS with the most-frequent-tag fallback learned from FILE.
    #[arg(long, value_name = "FILE")]
    pub fallback_pos: Option<PathBuf>,
    /// Domain for the simple system's relation label.
    #[arg(long, value_parser = parse_named::<Domain>)]
    pub domain: Option<Domain>,
    /// Per-decision candidate distributions, one JSON line per document.
    #[arg(long, value_name = "FILE")]
    pub diagnostics: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Gold documents (JSONL).
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,
    /// Predicted documents, paired with gold by id.
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also write the JSON report here.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is outside [0, 1]"))
    }
}

fn parse_ratios(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{p}' is not a number"))
        })
        .collect::<Result<_, _>>()?;
    let [a, b, c] = parts[..] else {
        return Err("expected three comma-separated fractions".into());
    };
    if [a, b, c].iter().any(|x| !(0.0..=1.0).contains(x)) || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(format!(
            "fractions {a}, {b}, {c} must lie in [0, 1] and sum to 1"
        ));
    }
    Ok((a, b, c))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
