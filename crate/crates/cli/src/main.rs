use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cocomment_cli::{config::PipelineConfig, exit_code, stages};
use cocomment_core::Result;

/// Co-commenter network analysis: build weekly co-comment graphs, extract
/// their statistically salient backbones, detect communities and track them
/// over time.
#[derive(Parser)]
#[command(name = "cocomment", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Key-value configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Input trace (JSONL or CSV).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Input format: jsonl or csv.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Abort on the first malformed input line.
    #[arg(long, global = true)]
    strict_parse: bool,

    /// Output directory for all artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Window length in days.
    #[arg(long, global = true)]
    window_days: Option<i64>,

    /// Weekday on which windows start (monday..sunday).
    #[arg(long, global = true)]
    anchor: Option<String>,

    /// Fixed UTC offset in seconds applied before windowing.
    #[arg(long, global = true)]
    utc_offset_secs: Option<i32>,

    /// Refuse posts with more unique commenters than this (0 = unlimited).
    #[arg(long, global = true)]
    clique_cap: Option<usize>,

    /// Significance level of the backbone filter.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Keep edges strictly above the null percentile (the default).
    #[arg(long, global = true, conflicts_with = "lenient")]
    strict: bool,

    /// Keep edges at or above the null percentile.
    #[arg(long, global = true)]
    lenient: bool,

    /// Use the exact null CDF for edges with at most this many posts.
    #[arg(long, global = true)]
    exact_cap: Option<usize>,

    /// Seed for Louvain visit order and the synthetic generator.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for stage-internal parallelism (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Stopword file, one token per line.
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,

    /// Lexicon file, attribute<TAB>pattern per line.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,

    /// Drop terms with fewer total occurrences than this.
    #[arg(long, global = true)]
    rare_threshold: Option<u64>,

    /// Drop this fraction of the most frequent vocabulary.
    #[arg(long, global = true)]
    popular_fraction: Option<f64>,

    /// Per-document TF-IDF sparsification size.
    #[arg(long, global = true)]
    top_terms: Option<usize>,

    /// Number of top terms in the per-community word report.
    #[arg(long, global = true)]
    top_words: Option<usize>,

    /// Minimum scored comments for a contrastive sentiment cell.
    #[arg(long, global = true)]
    min_comments: Option<usize>,

    /// Kruskal-Wallis significance threshold for lexicon attributes.
    #[arg(long, global = true)]
    kruskal_p: Option<f64>,

    /// Number of attributes kept by the Gini ranking.
    #[arg(long, global = true)]
    gini_top: Option<usize>,

    /// Synthetic trace: number of commenters.
    #[arg(long, global = true)]
    synth_commenters: Option<usize>,

    /// Synthetic trace: number of influencers.
    #[arg(long, global = true)]
    synth_influencers: Option<usize>,

    /// Synthetic trace: number of posts.
    #[arg(long, global = true)]
    synth_posts: Option<usize>,

    /// Synthetic trace: Zipf exponent of engagement profiles.
    #[arg(long, global = true)]
    synth_skew: Option<f64>,

    /// Synthetic trace: post sizes, const:<k> or zipf:<s>:<max>.
    #[arg(long, global = true)]
    synth_post_sizes: Option<String>,

    /// Planted groups, e.g. 20x15,10x5 (SIZExPOSTS).
    #[arg(long, global = true)]
    synth_groups: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a trace into filtered weekly snapshots.
    Ingest,
    /// Project snapshots onto co-commenter graphs.
    Graph,
    /// Extract the salient backbone of each window.
    Backbone,
    /// Detect Louvain communities on each backbone.
    Communities,
    /// Persistence, NMI and topic matching across windows.
    Dynamics,
    /// Content characterization reports per window.
    Text,
    /// Generate a synthetic trace.
    Synth,
    /// Run every stage in order.
    Pipeline,
}

fn build_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    let mut set = |key: &str, value: Option<String>| -> Result<()> {
        if let Some(value) = value {
            config.set(key, &value)?;
        }
        Ok(())
    };
    set("input", cli.input.as_ref().map(|p| p.display().to_string()))?;
    set("format", cli.format.clone())?;
    if cli.strict_parse {
        set("strict_parse", Some("true".into()))?;
    }
    set("out", cli.out.as_ref().map(|p| p.display().to_string()))?;
    set("window_days", cli.window_days.map(|v| v.to_string()))?;
    set("anchor", cli.anchor.clone())?;
    set("utc_offset_secs", cli.utc_offset_secs.map(|v| v.to_string()))?;
    set("clique_cap", cli.clique_cap.map(|v| v.to_string()))?;
    set("alpha", cli.alpha.map(|v| v.to_string()))?;
    if cli.strict {
        set("strict", Some("true".into()))?;
    }
    if cli.lenient {
        set("strict", Some("false".into()))?;
    }
    set("exact_cap", cli.exact_cap.map(|v| v.to_string()))?;
    set("seed", cli.seed.map(|v| v.to_string()))?;
    set("threads", cli.threads.map(|v| v.to_string()))?;
    set(
        "stopwords",
        cli.stopwords.as_ref().map(|p| p.display().to_string()),
    )?;
    set(
        "lexicon",
        cli.lexicon.as_ref().map(|p| p.display().to_string()),
    )?;
    set("rare_threshold", cli.rare_threshold.map(|v| v.to_string()))?;
    set(
        "popular_fraction",
        cli.popular_fraction.map(|v| v.to_string()),
    )?;
    set("top_terms", cli.top_terms.map(|v| v.to_string()))?;
    set("top_words", cli.top_words.map(|v| v.to_string()))?;
    set("min_comments", cli.min_comments.map(|v| v.to_string()))?;
    set("kruskal_p", cli.kruskal_p.map(|v| v.to_string()))?;
    set("gini_top", cli.gini_top.map(|v| v.to_string()))?;
    set(
        "synth_commenters",
        cli.synth_commenters.map(|v| v.to_string()),
    )?;
    set(
        "synth_influencers",
        cli.synth_influencers.map(|v| v.to_string()),
    )?;
    set("synth_posts", cli.synth_posts.map(|v| v.to_string()))?;
    set("synth_skew", cli.synth_skew.map(|v| v.to_string()))?;
    set("synth_post_sizes", cli.synth_post_sizes.clone())?;
    set("synth_groups", cli.synth_groups.clone())?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<()> {
    let config = build_config(cli)?;
    if config.threads > 0 {
        // Ignore the error when a pool already exists (e.g. repeated calls
        // in tests); thread count never changes results.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
    match cli.command {
        Command::Ingest => stages::run_ingest(&config),
        Command::Graph => stages::run_graph(&config),
        Command::Backbone => stages::run_backbone(&config),
        Command::Communities => stages::run_communities(&config),
        Command::Dynamics => stages::run_dynamics(&config),
        Command::Text => stages::run_text(&config),
        Command::Synth => stages::run_synth(&config),
        Command::Pipeline => stages::run_pipeline(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
