use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use retrace_core::reports::MentionDenominator;

mod commands;
mod config;
mod stages;

use config::{CorpusSource, PipelineConfig};

/// Citation analysis of retracted publications, stage by stage.
#[derive(Debug, Parser)]
#[command(name = "retrace", version, propagate_version = true)]
struct Cli {
    /// TOML or JSON pipeline config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding the stage files (overrides the config).
    #[arg(long, global = true)]
    workdir: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a retraction export into the canonical record store.
    Ingest(IngestArgs),
    /// Collect citing entities from the configured sources.
    Harvest(HarvestArgs),
    /// Score and filter cited items by humanities affinity.
    #[command(subcommand)]
    Affinity(AffinityCommand),
    /// Assign every citation to P-Pre, P-Ret or P-Post.
    Segment(SegmentArgs),
    /// In-text citations and their annotations.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
    /// Bag-of-words corpora.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Topic models.
    #[command(subcommand)]
    Topics(TopicsCommand),
    /// Descriptive tables over the current dataset.
    Report(ReportArgs),
    /// Write the visualization bundle.
    ExportVis(ExportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV or TSV export.
    #[arg(long)]
    input: PathBuf,
    /// `retraction_watch`, `canonical` or a JSON mapping file.
    #[arg(long)]
    mapping: Option<String>,
    /// `id,rationale` exclusion list.
    #[arg(long)]
    exclusions: Option<PathBuf>,
    /// Keep non-humanities records too.
    #[arg(long)]
    all_subjects: bool,
}

#[derive(Debug, Args)]
pub struct HarvestArgs {
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum AffinityCommand {
    /// Score every cited item.
    Score(AffinityScoreArgs),
    /// Split scored items at the threshold and restrict the dataset.
    Filter(AffinityFilterArgs),
}

#[derive(Debug, Args)]
pub struct AffinityScoreArgs {
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long)]
    entities: Option<PathBuf>,
    /// Human-judgment sidecar CSV.
    #[arg(long)]
    judgments: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AffinityFilterArgs {
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<i32>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    records: Option<PathBuf>,
    /// Citing entities (defaults to the affinity-filtered dataset).
    #[arg(long)]
    citations: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum AnnotateCommand {
    /// Find pointers in pre-extracted full texts and build citation contexts.
    Extract(ExtractArgs),
    /// Serve the annotation API and workbench.
    Serve(ServeArgs),
    /// Record annotations from a CSV file.
    Import(ImportArgs),
    /// Write current annotations as CSV.
    Export(ExportCsvArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// JSON array of full texts.
    #[arg(long)]
    fulltext: PathBuf,
    /// Extra section-title synonyms (JSON object label → phrases).
    #[arg(long)]
    synonyms: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: std::net::SocketAddr,
    #[arg(long)]
    citations: Option<PathBuf>,
    #[arg(long)]
    log: Option<PathBuf>,
    /// Decision tree config (defaults to the shipped one).
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Visualization bundle served under /api/visualizations.
    #[arg(long)]
    exports: Option<PathBuf>,
    /// Built workbench assets.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long)]
    csv: PathBuf,
    /// Annotator for rows without one.
    #[arg(long)]
    annotator: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExportCsvArgs {
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Debug, Subcommand)]
enum CorpusCommand {
    /// Tokenize abstracts or citation contexts into corpus.json.
    Build(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long, value_enum)]
    source: Option<CorpusSource>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum TopicsCommand {
    /// Fit one model.
    Fit(FitArgs),
    /// Fit a range of k and pick the most coherent.
    SelectK(SelectArgs),
    /// Relevance rankings, topic map and grouped tables.
    Export(TopicsExportArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Inclusive range such as `2..6`.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TopicsExportArgs {
    #[arg(long)]
    lambda: Option<f64>,
    /// Metadata keys for grouped tables.
    #[arg(long, value_delimiter = ',')]
    group_by: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_enum)]
    mention_denominator: Option<Denominator>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Denominator {
    AllEntities,
    FullTextOnly,
}

impl From<Denominator> for MentionDenominator {
    fn from(d: Denominator) -> Self {
        match d {
            Denominator::AllEntities => MentionDenominator::AllEntities,
            Denominator::FullTextOnly => MentionDenominator::FullTextOnly,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave topic outputs out of the bundle.
    #[arg(long)]
    no_topics: bool,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    if let Some(w) = cli.workdir {
        cfg.workdir = w;
    }
    let ctx = commands::Ctx::new(cfg);
    match cli.command {
        Command::Ingest(a) => commands::ingest::run(&ctx, a),
        Command::Harvest(a) => commands::harvest::run(&ctx, a),
        Command::Affinity(AffinityCommand::Score(a)) => commands::affinity::score(&ctx, a),
        Command::Affinity(AffinityCommand::Filter(a)) => commands::affinity::filter(&ctx, a),
        Command::Segment(a) => commands::segment::run(&ctx, a),
        Command::Annotate(AnnotateCommand::Extract(a)) => commands::annotate::extract(&ctx, a),
        Command::Annotate(AnnotateCommand::Serve(a)) => commands::annotate::serve(&ctx, a),
        Command::Annotate(AnnotateCommand::Import(a)) => commands::annotate::import(&ctx, a),
        Command::Annotate(AnnotateCommand::Export(a)) => commands::annotate::export(&ctx, a),
        Command::Corpus(CorpusCommand::Build(a)) => commands::corpus::build(&ctx, a),
        Command::Topics(TopicsCommand::Fit(a)) => commands::topics::fit(&ctx, a),
        Command::Topics(TopicsCommand::SelectK(a)) => commands::topics::select(&ctx, a),
        Command::Topics(TopicsCommand::Export(a)) => commands::topics::export(&ctx, a),
        Command::Report(a) => commands::report::report(&ctx, a),
        Command::ExportVis(a) => commands::report::export_vis(&ctx, a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(c) = e.downcast_ref::<config::ConfigErrors>() {
                eprint!("error: {c}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
