//! `sumdiff`: document difficulty features, predictors and experiments from the command line.
//!
//! Exit status is 0 on success, 1 when the input data is invalid and 2 for
//! usage and I/O errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Run;

#[derive(Debug, Parser)]
#[command(
    name = "sumdiff",
    version,
    about = "Predict and analyze per-document summarization difficulty"
)]
struct Cli {
    /// Worker threads for parallel stages; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the document feature vector of every corpus document.
    Features(FeaturesArgs),
    /// Correlate predictions with gold per-document scores.
    Eval(EvalArgs),
    /// Mean pairwise correlation between systems across documents.
    Agreement(AgreementArgs),
    /// Average per-summary metric scores into per-document (or per-set) scores.
    Average(AverageArgs),
    /// Correlate each feature with gold per-document scores.
    Analyze(AnalyzeArgs),
    /// Fit a regression or pairwise model on features and gold scores.
    Train(TrainArgs),
    /// Score documents with a trained model.
    Predict(PredictArgs),
    /// Route the lowest-predicted documents to human summarizers.
    Hybrid(HybridArgs),
    /// Paired bootstrap test between two document selectors.
    Bootstrap(BootstrapArgs),
    /// Reorder and truncate multi-document inputs.
    Mds(MdsArgs),
    /// Apply a perturbation to every document of a corpus.
    Transform(TransformArgs),
    /// Measure how perturbations move predicted scores.
    Probe(ProbeArgs),
    /// Wilcoxon signed-rank test between two paired score files.
    Wilcoxon(WilcoxonArgs),
    /// Cohen's kappa between two annotators.
    Kappa(KappaArgs),
    /// ROUGE of candidate summaries against references.
    Rouge(RougeArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Features(_) => "features",
            Command::Eval(_) => "eval",
            Command::Agreement(_) => "agreement",
            Command::Average(_) => "average",
            Command::Analyze(_) => "analyze",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Hybrid(_) => "hybrid",
            Command::Bootstrap(_) => "bootstrap",
            Command::Mds(_) => "mds",
            Command::Transform(_) => "transform",
            Command::Probe(_) => "probe",
            Command::Wilcoxon(_) => "wilcoxon",
            Command::Kappa(_) => "kappa",
            Command::Rouge(_) => "rouge",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScaleArg {
    UnitInterval,
    Unbounded,
}

impl From<ScaleArg> for sumdiff::corpus::Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::UnitInterval => sumdiff::corpus::Scale::UnitInterval,
            ScaleArg::Unbounded => sumdiff::corpus::Scale::Unbounded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Kendall,
    Pearson,
    Spearman,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SalienceArg {
    MeanRouge12,
    Rouge1,
    Rouge2,
    RougeL,
}

impl From<SalienceArg> for sumdiff::features::SalienceMetric {
    fn from(s: SalienceArg) -> Self {
        use sumdiff::features::SalienceMetric as M;
        match s {
            SalienceArg::MeanRouge12 => M::MeanRouge12,
            SalienceArg::Rouge1 => M::Rouge1,
            SalienceArg::Rouge2 => M::Rouge2,
            SalienceArg::RougeL => M::RougeL,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModelKind {
    Regression,
    Pairwise,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SchemaArg {
    /// Features computable from the source text alone.
    Source,
    /// Source features plus salient-sentence location.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OrderingArg {
    Original,
    Predicted,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WilcoxonArg {
    Auto,
    Exact,
    Normal,
}

/// Entity and salience options shared by commands that extract features.
#[derive(Debug, Args, Serialize)]
struct ExtractOpts {
    /// Entity annotations (`{"doc_id", "entities"}` records) replacing the built-in tagger.
    #[arg(long)]
    entities: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = SalienceArg::MeanRouge12)]
    salience: SalienceArg,
}

#[derive(Debug, Args, Serialize)]
struct ScoresOpts {
    /// Gold scores file (`{"doc_id", "system_id", "score"}` records).
    #[arg(long)]
    scores: PathBuf,

    /// Overrides the scale declared in the scores file header.
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
}

#[derive(Debug, Args, Serialize)]
struct FeaturesArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    extract: ExtractOpts,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[command(flatten)]
    scores: ScoresOpts,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-document scatter (label, prediction, gold) as CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AgreementArgs {
    #[command(flatten)]
    scores: ScoresOpts,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AverageArgs {
    /// Per-summary metric scores, in the scores file format.
    #[arg(long)]
    scores: PathBuf,
    /// Average per document set of this corpus instead of per document.
    #[arg(long)]
    sets: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct AnalyzeArgs {
    /// Feature records written by `features`.
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    scores: ScoresOpts,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-feature (label, kendall, spearman) as CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[group(id = "input", required = true, multiple = false)]
struct FeatureInput {
    /// Feature records written by `features`.
    #[arg(long, group = "input")]
    features: Option<PathBuf>,
    /// Corpus to extract features from.
    #[arg(long, group = "input")]
    corpus: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    input: FeatureInput,
    #[command(flatten)]
    extract: ExtractOpts,
    #[command(flatten)]
    scores: ScoresOpts,
    #[arg(long, value_enum, default_value_t = ModelKind::Regression)]
    kind: ModelKind,
    #[arg(long, value_enum, default_value_t = SchemaArg::Source)]
    schema: SchemaArg,
    /// L2 penalty of the regression solve.
    #[arg(long, default_value_t = sumdiff::ranker::DEFAULT_RIDGE)]
    ridge: f64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    /// Fraction of documents used for fitting; the rest are held out and evaluated.
    #[arg(long, default_value_t = 1.0)]
    train_fraction: f64,
    #[arg(long)]
    model_out: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: FeatureInput,
    #[command(flatten)]
    extract: ExtractOpts,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct HybridArgs {
    #[command(flatten)]
    scores: ScoresOpts,
    /// System whose summaries are being replaced.
    #[arg(long)]
    system: String,
    /// Predictions that decide which documents go to people.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long = "fraction", default_values_t = [0.1, 0.2])]
    fractions: Vec<f64>,
    /// Competing selector to test against with the paired bootstrap.
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// (selector, fraction, mean after) as CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct BootstrapArgs {
    #[command(flatten)]
    scores: ScoresOpts,
    #[arg(long)]
    system: String,
    /// Selector claimed to be better.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    fraction: f64,
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MdsArgs {
    /// Corpus whose `set_id` groups documents; without set ids it is one set.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long = "limit", default_values_t = [256, 512, 1024])]
    limits: Vec<usize>,
    #[arg(long = "ordering", value_enum, default_values_t = [OrderingArg::Original, OrderingArg::Predicted])]
    orderings: Vec<OrderingArg>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TransformArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// For example `delete_words:0.3`, `keep_first:3` or `replace_names:bank`.
    #[arg(long)]
    spec: String,
    /// Drop documents the transform cannot apply to instead of failing.
    #[arg(long)]
    skip_infeasible: bool,
    #[arg(long)]
    entities: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ProbeArgs {
    /// Transforms to probe; defaults to the full published suite.
    #[arg(long = "spec")]
    specs: Vec<String>,
    #[arg(long, requires = "corpus", conflicts_with_all = ["before", "after"])]
    model: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    extract: ExtractOpts,
    /// Scores of the original documents produced elsewhere.
    #[arg(long, requires = "after")]
    before: Option<PathBuf>,
    /// Scores of the transformed documents produced elsewhere.
    #[arg(long, requires = "before")]
    after: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// (transform, mean before, mean after) as CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct WilcoxonArgs {
    /// Per-document scores (`{"doc_id", "score"}`), paired with `--y` by id.
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, value_enum, default_value_t = WilcoxonArg::Auto)]
    method: WilcoxonArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct KappaArgs {
    /// Labels (`{"id", "label"}` records) of the first annotator.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct RougeArgs {
    /// Records `{"id", "candidate", "references": [...]}`.
    #[arg(long)]
    pairs: PathBuf,
    /// `rouge-1`, `rouge-2`, ... or `rouge-l`.
    #[arg(long, default_value = "rouge-2")]
    variant: String,
    #[arg(long)]
    stem: bool,
    /// Per-item F1 in the predictions format.
    #[arg(long)]
    scores_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(sumdiff::Error),
    /// A data error found while reading a particular input file.
    InFile(PathBuf, sumdiff::Error),
}

impl From<sumdiff::Error> for Failure {
    fn from(e: sumdiff::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(e) if e.is_io() => 2,
            Failure::Lib(_) | Failure::InFile(..) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Lib(e) => e.fmt(f),
            Failure::InFile(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let ctx = Run {
        seed: cli.seed,
        threads: cli.threads,
    };
    match &cli.command {
        Command::Features(a) => commands::features(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
        Command::Agreement(a) => commands::agreement(&ctx, a),
        Command::Average(a) => commands::average(&ctx, a),
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Predict(a) => commands::predict(&ctx, a),
        Command::Hybrid(a) => commands::hybrid(&ctx, a),
        Command::Bootstrap(a) => commands::bootstrap(&ctx, a),
        Command::Mds(a) => commands::mds(&ctx, a),
        Command::Transform(a) => commands::transform(&ctx, a),
        Command::Probe(a) => commands::probe(&ctx, a),
        Command::Wilcoxon(a) => commands::wilcoxon(&ctx, a),
        Command::Kappa(a) => commands::kappa(&ctx, a),
        Command::Rouge(a) => commands::rouge(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sumdiff {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
