use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "trelkit",
    version,
    about = "Build small IR test collections and measure how far their verdicts can be trusted"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice; echoed on stdout.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Directory that receives the reports.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Collection root laid out like `trelkit synth` output.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic collection.
    Synth,
    /// Build pools.
    #[command(subcommand)]
    Pool(PoolCommand),
    /// Score system runs.
    Eval(EvalArgs),
    /// Build trels from multi-assessor judgments.
    #[command(subcommand)]
    Trel(TrelCommand),
    /// Agreement between the two assessors of each topic.
    Agree(AgreeArgs),
    /// How much system scores and rankings move across trels.
    #[command(subcommand)]
    Stability(StabilityCommand),
    /// Effect of pool growth on scores.
    Incomplete(IncompleteArgs),
    /// Quality control of collected judgments.
    #[command(subcommand)]
    Qc(QcCommand),
    /// Strip raw pages down to judging markup.
    Clean(CleanArgs),
    /// Run the judging service.
    Serve(ServeArgs),
    /// Every report for one collection.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct RunsArg {
    /// Directory of system run files (one `*.run` per system).
    #[arg(long)]
    pub runs: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct JudgmentsArg {
    /// Judgment file with one or two assessors per topic.
    #[arg(long)]
    pub judgments: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ManifestArg {
    /// Crawl manifest (`topic,doc` lines, noise topics marked).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct MeasureArg {
    /// Measure such as `ndcg@100`, `ap@100`, `p@10`, `rr`, `r@50`, `c@20`;
    /// repeatable.
    #[arg(long = "measure", short = 'm')]
    pub measures: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum PoolCommand {
    /// Size-k pools with search-engine and noise injection.
    Make(PoolMakeArgs),
    /// Nested pools of increasing size from the same injections.
    Growth(PoolGrowthArgs),
}

#[derive(Debug, Args)]
pub struct PoolMakeArgs {
    /// Directory of pooling run files.
    #[arg(long)]
    pub pooling_runs: Option<PathBuf>,
    /// Search-engine run used for injection.
    #[arg(long)]
    pub search_run: Option<PathBuf>,
    #[command(flatten)]
    pub manifest: ManifestArg,
    /// Topics file; restricts pooling to the topics it lists.
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Target pool size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Search-engine documents injected per topic.
    #[arg(long)]
    pub search: Option<usize>,
    /// Noise documents injected per topic.
    #[arg(long)]
    pub noise: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PoolGrowthArgs {
    #[arg(long)]
    pub pooling_runs: Option<PathBuf>,
    /// Pools whose injected documents are reused at every size.
    #[arg(long)]
    pub pools: Option<PathBuf>,
    #[command(flatten)]
    pub manifest: ManifestArg,
    /// Target sizes as `from:to:step`.
    #[arg(long)]
    pub sizes: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Curve {
    /// R@k against k.
    Recall,
    /// C@k against k.
    Crawl,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub runs: RunsArg,
    /// Score against one trel file (per-topic scores).
    #[arg(long, conflicts_with = "judgments")]
    pub trel: Option<PathBuf>,
    /// Score against trels sampled from these judgments (mean and sd).
    #[command(flatten)]
    pub judgments: JudgmentsArg,
    #[command(flatten)]
    pub manifest: ManifestArg,
    #[command(flatten)]
    pub measure: MeasureArg,
    /// Number of sampled trels.
    #[arg(long, short = 'n')]
    pub trels: Option<usize>,
    /// Also write a cutoff curve, under `--trel` or the union trel.
    #[arg(long, value_enum)]
    pub curve: Option<Curve>,
    /// Cutoffs of the curve as `from:to:step`.
    #[arg(long, default_value = "1:100:1")]
    pub cutoffs: String,
}

#[derive(Debug, Subcommand)]
pub enum TrelCommand {
    /// Uniformly sampled assessor combinations, one trel file each.
    Sample(TrelSampleArgs),
    /// The most lenient trel.
    Union(JudgmentsArg),
    /// The strictest trel.
    Intersect(JudgmentsArg),
}

#[derive(Debug, Args)]
pub struct TrelSampleArgs {
    #[command(flatten)]
    pub judgments: JudgmentsArg,
    #[arg(long, short = 'n')]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Weighting {
    Unweighted,
    Linear,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    #[command(flatten)]
    pub judgments: JudgmentsArg,
    #[arg(long, value_enum)]
    pub weighting: Option<Weighting>,
    /// Random assessor orientations averaged for precision and recall.
    #[arg(long)]
    pub draws: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum StabilityCommand {
    /// Score distributions across sampled trels and largest differences.
    Scores(StabilityArgs),
    /// Kendall's tau between rankings under pairs of trels.
    Tau(TauArgs),
    /// Ranking swaps and whether the Wilcoxon test calls them significant.
    Swaps(TauArgs),
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub runs: RunsArg,
    #[command(flatten)]
    pub judgments: JudgmentsArg,
    #[command(flatten)]
    pub manifest: ManifestArg,
    #[command(flatten)]
    pub measure: MeasureArg,
    #[arg(long, short = 'n')]
    pub trels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TauArgs {
    #[command(flatten)]
    pub runs: RunsArg,
    #[command(flatten)]
    pub judgments: JudgmentsArg,
    #[command(flatten)]
    pub manifest: ManifestArg,
    #[command(flatten)]
    pub measure: MeasureArg,
    /// Number of trel pairs.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IncompleteArgs {
    #[command(flatten)]
    pub runs: RunsArg,
    #[arg(long)]
    pub pooling_runs: Option<PathBuf>,
    #[arg(long)]
    pub pools: Option<PathBuf>,
    #[command(flatten)]
    pub judgments: JudgmentsArg,
    #[command(flatten)]
    pub manifest: ManifestArg,
    #[command(flatten)]
    pub measure: MeasureArg,
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long, short = 'n')]
    pub trels: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum QcCommand {
    /// Judged noise documents per assessor; flags high violation rates.
    Noise(QcNoiseArgs),
}

#[derive(Debug, Args)]
pub struct QcNoiseArgs {
    #[command(flatten)]
    pub judgments: JudgmentsArg,
    #[command(flatten)]
    pub manifest: ManifestArg,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    /// HTML files or directories of them; the file stem is the document id.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Service configuration; defaults to the `[service]` table of `--config`.
    #[arg(long)]
    pub service_config: Option<PathBuf>,
    /// Data directory, when no service configuration is given.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Overrides the listen address (`127.0.0.1:0` picks a free port).
    #[arg(long)]
    pub listen: Option<String>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Generate a synthetic collection into `<output>/collection` first.
    #[arg(long)]
    pub synth: bool,
}
