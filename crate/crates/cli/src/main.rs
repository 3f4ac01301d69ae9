//! `ddh` — binary hashing pipeline over feature files.
//!
//! Subcommands cover the whole flow: `synth` generates a clustered
//! benchmark, `labels` builds the self-supervised pair structure, `train`
//! fits the hash layer, `encode` produces bit-packed codes (also for items
//! never seen in training), `lsh` is the untrained random-hyperplane
//! baseline, and `eval` scores retrieval. Every command takes an explicit
//! seed where randomness is involved and writes byte-identical outputs for
//! identical inputs.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ddh_core::io;
use ddh_core::synth::SynthConfig;
use ddh_core::train::TrainConfig;
use ddh_core::FeatureMatrix;

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (file formats: ddhf=1 ddhb=1 ddhp=1 ddhm=1)"
);

#[derive(Parser)]
#[command(name = "ddh", version, long_version = LONG_VERSION)]
#[command(about = "Self-supervised binary hashing: pseudo labels, training, Hamming retrieval")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the positive-pair structure from a feature file.
    Labels(LabelsArgs),
    /// Train a hash model on features plus a pair file.
    Train(TrainArgs),
    /// Encode features into binary codes with a trained model.
    Encode(EncodeArgs),
    /// Random-hyperplane baseline codes (no training).
    Lsh(LshArgs),
    /// Evaluate retrieval: mAP@R and an optional precision-recall CSV.
    Eval(EvalArgs),
    /// Generate a clustered Gaussian benchmark (features + labels).
    Synth(SynthArgs),
}

#[derive(Args)]
struct LabelsArgs {
    /// Input feature file (.ddhf, or .csv with --csv).
    #[arg(long)]
    features: PathBuf,
    /// Treat the input as headerless numeric CSV.
    #[arg(long)]
    csv: bool,
    /// Neighbors per ranking list.
    #[arg(long, default_value_t = 15)]
    k1: usize,
    /// Lists merged during neighborhood expansion.
    #[arg(long, default_value_t = 6)]
    k2: usize,
    /// Output pair file (.ddhp).
    #[arg(long)]
    out: PathBuf,
    /// Optional ground-truth labels; prints the constructed-label precision.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    /// Pair file from `ddh labels`.
    #[arg(long)]
    pairs: PathBuf,
    /// Code length in bits.
    #[arg(long, default_value_t = 64)]
    bits: usize,
    /// Quantization weight.
    #[arg(long, default_value_t = 15.0)]
    lambda1: f64,
    /// Parameter regularization weight.
    #[arg(long, default_value_t = 1e-5)]
    lambda2: f64,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 128)]
    batch: usize,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file (.ddhm); a per-epoch report lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Output code file (.ddhb).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LshArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 64)]
    bits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    query_codes: PathBuf,
    #[arg(long)]
    db_codes: PathBuf,
    #[arg(long)]
    query_labels: PathBuf,
    #[arg(long)]
    db_labels: PathBuf,
    /// mAP cutoff R.
    #[arg(long, default_value_t = 1000)]
    map_at: usize,
    /// Queries are database rows; skip the identically-indexed item.
    #[arg(long)]
    exclude_self: bool,
    /// Write the precision-recall curve as CSV (rank,recall,precision).
    #[arg(long)]
    pr_out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 200)]
    per_cluster: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Point jitter relative to the unit cluster-center spread.
    #[arg(long, default_value_t = 0.8)]
    noise: f64,
    /// Global feature magnitude (default matches CNN-activation scale).
    #[arg(long, default_value_t = 2.2)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_features: PathBuf,
    #[arg(long)]
    out_labels: PathBuf,
}

fn load_feature_file(path: &PathBuf, csv: bool) -> Result<FeatureMatrix> {
    let features = if csv {
        io::load_features_csv(path)?
    } else {
        io::load_features(path)?
    };
    Ok(features)
}

fn cmd_labels(args: LabelsArgs) -> Result<()> {
    if args.k1 == 0 {
        bail!("--k1 must be at least 1");
    }
    if args.k2 == 0 {
        bail!("--k2 must be at least 1");
    }
    let features = load_feature_file(&args.features, args.csv)?;
    let pairs = ddh_core::build_pairs(&features, args.k1, args.k2)?;
    io::write_pairs(&pairs, &args.out)?;
    println!(
        "items={} positive_pairs={} out={}",
        pairs.n_items(),
        pairs.n_positive_pairs(),
        args.out.display()
    );
    if let Some(truth_path) = args.truth {
        let truth = io::load_labels(&truth_path)?;
        let precision = ddh_core::label_precision(&pairs, &truth)?;
        println!("label_precision={precision}");
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    if args.bits == 0 {
        bail!("--bits must be at least 1");
    }
    let cfg = TrainConfig {
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        learning_rate: args.lr,
        batch_size: args.batch,
        epochs: args.epochs,
        seed: args.seed,
    };
    cfg.validate()?;
    let features = io::load_features(&args.features)?;
    let pairs = io::load_pairs(&args.pairs)?;
    let (model, report) = ddh_core::train(&features, &pairs, &cfg, args.bits)?;
    io::write_model(&model, &args.out)?;

    let report_path = sidecar_report_path(&args.out);
    std::fs::write(&report_path, report.to_text())
        .with_context(|| format!("writing report to {}", report_path.display()))?;

    let last = report.epochs.last().expect("at least one epoch");
    println!(
        "epochs={} final_objective={} model={} report={}",
        report.epochs.len(),
        last.objective,
        args.out.display(),
        report_path.display()
    );
    Ok(())
}

fn sidecar_report_path(model_path: &std::path::Path) -> PathBuf {
    let mut name = model_path.file_name().unwrap_or_default().to_os_string();
    name.push(".report.txt");
    model_path.with_file_name(name)
}

fn cmd_encode(args: EncodeArgs) -> Result<()> {
    let model = io::load_model(&args.model)?;
    let features = io::load_features(&args.features)?;
    let codes = model.encode(&features)?;
    io::write_codes(&codes, &args.out)?;
    println!(
        "items={} bits={} out={}",
        codes.n_items(),
        codes.code_len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_lsh(args: LshArgs) -> Result<()> {
    let features = io::load_features(&args.features)?;
    let model = ddh_core::lsh_init(features.dim(), args.bits, args.seed)?;
    let codes = model.encode(&features)?;
    io::write_codes(&codes, &args.out)?;
    println!(
        "items={} bits={} out={}",
        codes.n_items(),
        codes.code_len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    if args.map_at == 0 {
        bail!("--map-at must be at least 1");
    }
    let queries = io::load_codes(&args.query_codes)?;
    let db = io::load_codes(&args.db_codes)?;
    let query_labels = io::load_labels(&args.query_labels)?;
    let db_labels = io::load_labels(&args.db_labels)?;
    if query_labels.n_items() != queries.n_items() {
        bail!(
            "{} query labels for {} query codes",
            query_labels.n_items(),
            queries.n_items()
        );
    }
    if db_labels.n_items() != db.n_items() {
        bail!(
            "{} database labels for {} database codes",
            db_labels.n_items(),
            db.n_items()
        );
    }

    // One full ranking serves both the truncated mAP and the PR curve.
    let result = ddh_core::retrieve(&queries, &db, db.n_items(), args.exclude_self)?;
    let map = ddh_core::mean_average_precision(&result, &query_labels, &db_labels, args.map_at)?;
    println!(
        "map@{}={} queries={} bits={}",
        args.map_at,
        map,
        queries.n_items(),
        queries.code_len()
    );

    if let Some(pr_path) = args.pr_out {
        let curve = ddh_core::precision_recall_curve(&result, &query_labels, &db_labels)?;
        let mut csv = String::from("rank,recall,precision\n");
        for (rank, (recall, precision)) in curve.iter().enumerate() {
            csv.push_str(&format!("{},{},{}\n", rank + 1, recall, precision));
        }
        std::fs::write(&pr_path, csv)
            .with_context(|| format!("writing PR curve to {}", pr_path.display()))?;
        println!("pr_curve={}", pr_path.display());
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        clusters: args.clusters,
        per_cluster: args.per_cluster,
        dim: args.dim,
        noise: args.noise,
        scale: args.scale,
        seed: args.seed,
    };
    let (features, labels) = ddh_core::synth::generate(&cfg)?;
    io::write_features(&features, &args.out_features)?;
    io::write_labels(&labels, &args.out_labels)?;
    println!(
        "items={} dim={} features={} labels={}",
        features.n_items(),
        features.dim(),
        args.out_features.display(),
        args.out_labels.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Labels(args) => cmd_labels(args),
        Command::Train(args) => cmd_train(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Lsh(args) => cmd_lsh(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
