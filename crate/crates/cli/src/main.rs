use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use protolex_cli::config::parse_override;
use protolex_cli::{
    cmd_discover, cmd_filter, cmd_ingest, cmd_nounclass, cmd_phylo, cmd_report, cmd_simulate, cmd_validate, RunConfig,
    OUT_ENV,
};

#[derive(Parser)]
#[command(
    name = "protolex",
    version,
    about = "Cognate discovery and phylogenetic recovery from lemma embeddings"
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load embeddings, check them, and write a normalized copy with per-language counts
    Ingest,
    /// Find cross-lingual cognate candidates
    Discover,
    /// Discover, then flag proper nouns, stoplist roots and uniform-coherence loanwords
    Filter,
    /// Match candidates against reconstructions and basic-vocabulary wordlists
    Validate,
    /// Noun-class similarity and its permutation test
    Nounclass,
    /// Language similarity, Ward tree, MDS, zone test and optional RF distance
    Phylo,
    /// Generate a synthetic language family with planted ground truth
    Simulate,
    /// Summarize the stage outputs found in the output directory
    Report,
}

/// Flags override config-file values; `--set` reaches every config key.
#[derive(Args)]
struct Opts {
    /// Flat key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Any config key, as KEY=VALUE (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (also settable through PROTOLEX_OUT)
    #[arg(long = "out", global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    second_embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    blr3: Option<PathBuf>,
    #[arg(long, global = true)]
    asjp: Option<PathBuf>,
    #[arg(long, global = true)]
    languages: Option<PathBuf>,
    #[arg(long, global = true)]
    stoplist: Option<PathBuf>,
    #[arg(long, global = true)]
    proper_nouns: Option<PathBuf>,
    #[arg(long, global = true)]
    reference_tree: Option<PathBuf>,
    /// Candidate TSV to validate instead of running discovery
    #[arg(long, global = true)]
    candidates: Option<PathBuf>,
    #[arg(long, global = true)]
    min_languages: Option<usize>,
    #[arg(long, global = true)]
    sim_threshold: Option<f64>,
    #[arg(long, global = true)]
    n_permutations: Option<usize>,
    /// shared-lemma or all-pairs
    #[arg(long, global = true)]
    similarity_mode: Option<String>,
    /// within-language or pair-labels
    #[arg(long, global = true)]
    permutation: Option<String>,
    /// Test record pairs instead of class centroids
    #[arg(long, global = true)]
    pairwise: bool,
    /// Log level for diagnostics on stderr
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
}

impl Opts {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut o: Vec<(String, String)> = self.set.iter().map(|s| parse_override(s)).collect::<Result<_>>()?;
        let path = |k: &str, v: &Option<PathBuf>| v.as_ref().map(|p| (k.to_string(), p.display().to_string()));
        o.extend(
            [
                path("out_dir", &self.out_dir),
                path("embeddings", &self.embeddings),
                path("second_embeddings", &self.second_embeddings),
                path("blr3", &self.blr3),
                path("asjp", &self.asjp),
                path("languages", &self.languages),
                path("stoplist", &self.stoplist),
                path("proper_nouns", &self.proper_nouns),
                path("reference_tree", &self.reference_tree),
                path("candidates", &self.candidates),
                self.seed.map(|v| ("seed".into(), v.to_string())),
                self.min_languages.map(|v| ("min_languages".into(), v.to_string())),
                self.sim_threshold.map(|v| ("sim_threshold".into(), v.to_string())),
                self.n_permutations.map(|v| ("n_permutations".into(), v.to_string())),
                self.similarity_mode.clone().map(|v| ("similarity_mode".into(), v)),
                self.permutation.clone().map(|v| ("permutation".into(), v)),
                self.pairwise.then(|| ("pairwise".into(), "true".into())),
            ]
            .into_iter()
            .flatten(),
        );
        Ok(o)
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = RunConfig::resolve(
        cli.opts.config.as_deref(),
        &cli.opts.overrides()?,
        std::env::var(OUT_ENV).ok(),
    )?;
    let manifest = match cli.command {
        Command::Ingest => cmd_ingest(&config)?.manifest,
        Command::Discover => cmd_discover(&config)?.manifest,
        Command::Filter => cmd_filter(&config)?.manifest,
        Command::Validate => cmd_validate(&config)?.written.manifest,
        Command::Nounclass => cmd_nounclass(&config)?.written.manifest,
        Command::Phylo => cmd_phylo(&config)?.written.manifest,
        Command::Simulate => cmd_simulate(&config)?.manifest,
        Command::Report => cmd_report(&config)?.manifest,
    };
    log::info!("manifest {}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.opts.log_level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
