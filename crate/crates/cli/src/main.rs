//! `instrank` — rank research institutions by forecasting per-conference
//! relevance scores from historical publication records.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "instrank",
    version,
    about = "Forecast-based ranking of research institutions",
    propagate_version = true
)]
struct Cli {
    /// Seed for every stochastic component (bootstrap ensembles).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Parse raw publication dumps into a validated corpus
    Ingest(IngestArgs),
    /// Identify full research papers from a proceedings dump
    FilterPapers(FilterPapersArgs),
    /// Aggregate fractional authorship votes into relevance scores
    Relscore(RelscoreArgs),
    /// Forecast next-year scores and write a prediction file
    Forecast(ForecastArgs),
    /// Score a prediction file against a ground-truth file with NDCG@N
    Evaluate(EvaluateArgs),
    /// Cross-validate a model (optionally grid-searching alpha)
    Cv(CvArgs),
    /// Rank affiliations by PageRank over the co-authorship network
    Netrank(NetrankArgs),
    /// Run ingest -> full papers -> relscore -> forecast end to end
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Papers TSV (paper, original title, normalized title, year, conference, pages, section)
    #[arg(long)]
    papers: PathBuf,
    /// Attribution TSV (paper, author, affiliation)
    #[arg(long)]
    paa: PathBuf,
    /// Comma-separated conference ids to keep
    #[arg(long)]
    conferences: String,
    /// Directory for the canonical corpus files
    #[arg(long)]
    out_dir: PathBuf,
    /// Abort when the malformed-row fraction exceeds this
    #[arg(long, default_value_t = instrank_core::ingest::DEFAULT_MALFORMED_RATIO)]
    malformed_tolerance: f64,
}

#[derive(Args)]
struct FilterPapersArgs {
    /// Proceedings dump (conference, year, section, title, pages)
    #[arg(long)]
    proceedings: PathBuf,
    /// Corpus papers TSV to match titles against
    #[arg(long)]
    corpus_papers: PathBuf,
    /// Labelled section names (section<TAB>0/1)
    #[arg(long)]
    section_labels: PathBuf,
    /// Labelled page counts (pages<TAB>0/1)
    #[arg(long)]
    page_labels: PathBuf,
    /// Keyword file, one per line; built-in list when omitted
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// unanimous (disagreements queue for review) or majority
    #[arg(long, default_value = "unanimous")]
    policy: String,
    /// Reject soft matches above this normalized edit cost
    #[arg(long, default_value_t = instrank_core::ingest::DEFAULT_MATCH_THRESHOLD)]
    match_threshold: f64,
    /// Trees in the page-length bootstrap ensemble
    #[arg(long, default_value_t = 25)]
    trees: usize,
    /// Directory for full_papers.txt and review_queue.tsv
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RelscoreArgs {
    #[arg(long)]
    papers: PathBuf,
    #[arg(long)]
    paa: PathBuf,
    /// Full-paper id list, one per line
    #[arg(long)]
    full_papers: PathBuf,
    /// Output relevance-score TSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ForecastArgs {
    /// Relevance-score TSV produced by `relscore`
    #[arg(long)]
    rel_scores: PathBuf,
    #[arg(long)]
    conference: String,
    /// Year to predict; history strictly before it is used
    #[arg(long)]
    year: i32,
    /// naive-es, es, arima, or last3
    #[arg(long, default_value = "naive-es")]
    model: String,
    /// Smoothing factor for --model es
    #[arg(long)]
    alpha: Option<f64>,
    /// ARIMA candidate orders, e.g. "1,1,1;1,1,0;0,1,1"
    #[arg(long)]
    orders: Option<String>,
    /// Output prediction file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Prediction file (3-column, or the 2-column netrank form)
    #[arg(long)]
    prediction: PathBuf,
    /// Ground-truth TSV restricted to one conference-year
    #[arg(long)]
    truth: PathBuf,
    /// NDCG cutoff
    #[arg(long, default_value_t = 20)]
    n: usize,
}

#[derive(Args)]
struct CvArgs {
    /// Flat key = value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rel_scores: Option<PathBuf>,
    #[arg(long)]
    conference: Option<String>,
    /// Comma-separated target years
    #[arg(long)]
    years: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    orders: Option<String>,
    /// Alpha grid ("0.2,0.4,1.0" or "default") for grid search
    #[arg(long)]
    grid: Option<String>,
    /// Write the per-year report TSV here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NetrankArgs {
    #[arg(long)]
    papers: PathBuf,
    #[arg(long)]
    paa: PathBuf,
    #[arg(long)]
    conference: String,
    #[arg(long, default_value_t = instrank_core::netrank::DEFAULT_DAMPING)]
    damping: f64,
    #[arg(long, default_value_t = instrank_core::netrank::DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// Flat key = value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    papers: Option<PathBuf>,
    #[arg(long)]
    paa: Option<PathBuf>,
    /// Conference ids to ingest (comma-separated)
    #[arg(long)]
    conferences: Option<String>,
    /// Conference to predict; defaults to the sole ingested one
    #[arg(long)]
    conference: Option<String>,
    /// Precomputed full-paper list; otherwise the filter inputs are used
    #[arg(long)]
    full_papers: Option<PathBuf>,
    #[arg(long)]
    proceedings: Option<PathBuf>,
    #[arg(long)]
    section_labels: Option<PathBuf>,
    #[arg(long)]
    page_labels: Option<PathBuf>,
    #[arg(long)]
    dictionary: Option<PathBuf>,
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    match_threshold: Option<f64>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    orders: Option<String>,
    #[arg(long)]
    year: Option<i32>,
    /// Output prediction file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also score the prediction against the observed target year
    #[arg(long)]
    evaluate: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    malformed_tolerance: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::FilterPapers(args) => commands::filter_papers(args, cli.seed),
        Command::Relscore(args) => commands::relscore(args),
        Command::Forecast(args) => commands::forecast(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Cv(args) => commands::cv(args),
        Command::Netrank(args) => commands::netrank(args),
        Command::Pipeline(args) => commands::pipeline(args, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.kind.exit_code())
        }
    }
}
