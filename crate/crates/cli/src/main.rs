mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "apne", version, about = "Attributed network embedding by explicit matrix factorization")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample random walks and write the co-occurrence matrix.
    Sample(SampleArgs),
    /// Factorize a co-occurrence matrix with node content into embeddings.
    Embed(EmbedArgs),
    /// Evaluate embeddings or heuristics on a downstream task.
    Eval {
        #[command(subcommand)]
        task: EvalTask,
    },
    /// Compare rooted PageRank with the high-order proximity it approximates.
    Verify(VerifyArgs),
    /// Hold out edges for link prediction and write the residual graph.
    Split(SplitArgs),
    /// Re-run the invocation recorded in a `.config` file.
    Replay { config: PathBuf },
}

#[derive(Debug, Args)]
struct SampleArgs {
    edges: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Edge list has a third weight column.
    #[arg(long)]
    weighted: bool,
    #[arg(long, default_value_t = 40)]
    walk_length: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 80)]
    walks_per_node: usize,
    /// Same-label pairs to inject (requires --labels).
    #[arg(long, default_value_t = 0)]
    label_context: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
    /// Also write the sampled walks, one per line.
    #[arg(long)]
    walks_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    cooccur: PathBuf,
    /// Sparse `node feature value` triplets, or a dense CSV with `--dense`.
    /// Without features the content matrix is the identity (structure only).
    #[arg(long)]
    features: Option<PathBuf>,
    /// Features are a dense CSV with a `node,...` header.
    #[arg(long, requires = "features")]
    dense: bool,
    #[arg(long)]
    num_features: Option<usize>,
    #[arg(long, default_value_t = 200)]
    dim: usize,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    step: f64,
    #[arg(long, default_value_t = 5)]
    neg: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    inner_max: usize,
    #[arg(long, default_value_t = 1e-4)]
    inner_tol: f64,
    #[arg(long, default_value_t = 0.01)]
    init_scale: f64,
    #[arg(long, default_value_t = 256)]
    block_rows: usize,
    #[arg(short, long)]
    out: PathBuf,
    /// Loss trajectory CSV (default: `<out>.loss.csv`).
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Also write the feature dictionary S in word2vec layout.
    #[arg(long)]
    dump_s: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum EvalTask {
    /// Semi-supervised node classification with one-vs-rest logistic regression.
    Classify(ClassifyArgs),
    /// Link prediction on held-out edges.
    Linkpred(LinkpredArgs),
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    embeddings: PathBuf,
    labels: PathBuf,
    #[arg(long, default_value_t = 20)]
    per_class: usize,
    #[arg(long, default_value_t = 1000)]
    test_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    l2: f64,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LinkpredArgs {
    /// `EMBEDDINGS EDGES` for cosine scoring, or just `EDGES` for a heuristic.
    #[arg(required = true, num_args = 1..=2)]
    paths: Vec<PathBuf>,
    /// cosine, cn, jaccard, aa or pa.
    #[arg(long, default_value = "cosine")]
    method: String,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Per-pair `u,v,label,score` CSV.
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    edges: PathBuf,
    #[arg(long, default_value_t = 5)]
    order: usize,
    #[arg(long, default_value_t = 0.85)]
    beta: f64,
    /// Walks per node for a sampled check of `order * D^nor` against `S^order`.
    #[arg(long)]
    empirical: Option<usize>,
    #[arg(long, default_value_t = 40)]
    walk_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    edges: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    #[arg(long)]
    weighted: bool,
    /// Residual edge list; held-out pairs go to `<out>.pairs.csv`.
    #[arg(short, long)]
    out: PathBuf,
}

fn parse(args: Vec<String>) -> Result<Cli, ExitCode> {
    Cli::try_parse_from(args).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(commands::EXIT_USAGE)
        } else {
            ExitCode::SUCCESS
        }
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Embed(a) => commands::embed(a),
        Command::Eval { task: EvalTask::Classify(a) } => commands::classify(a),
        Command::Eval { task: EvalTask::Linkpred(a) } => commands::linkpred(a),
        Command::Verify(a) => commands::verify(a),
        Command::Split(a) => commands::split(a),
        Command::Replay { config } => {
            let text = std::fs::read_to_string(&config).map_err(Failure::data)?;
            let recorded = config::RunConfig::parse(&text).map_err(Failure::Usage)?;
            let mut args = vec!["apne".to_owned()];
            args.extend(recorded.to_args());
            let cli = parse(args).map_err(|_| Failure::Usage(format!("{} does not replay", config.display())))?;
            if matches!(cli.command, Command::Replay { .. }) {
                return Err(Failure::Usage("a replay config cannot replay another".into()));
            }
            run(cli)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match parse(std::env::args().collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("apne: {e}");
            return ExitCode::from(commands::EXIT_USAGE);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("apne: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
