//! Command-line front end. The `mfir` binary only parses arguments and
//! forwards to [`run`].

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::eval_harness::{generate_synthetic_corpus, run_experiment, ExperimentSpec};
use crate::fusion_search::{rank, Weights};
use crate::gabor_texture::GaborBankParams;
use crate::index_store::{
    build_index_with_report, load_index, save_index, FeatureExtractor, DEFAULT_DISCRETIZATION_BINS,
};

#[derive(Debug, Parser)]
#[command(
    name = "mfir",
    version,
    about = "Gabor + color-histogram image retrieval with rough-set feature reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract features for every image under a directory and write an index.
    Index(IndexArgs),
    /// Rank indexed images against a query image.
    Query(QueryArgs),
    /// Recompute the rough-set reduct of an index in place.
    Reduce(ReduceArgs),
    /// Run a training-size / database-size accuracy sweep.
    Evaluate(EvaluateArgs),
    /// Generate a labeled synthetic grating corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct GaborArgs {
    #[arg(long, default_value_t = 4)]
    pub scales: usize,
    #[arg(long, default_value_t = 6)]
    pub orientations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub ulow: f64,
    #[arg(long, default_value_t = 0.4)]
    pub uhigh: f64,
    #[arg(long, default_value_t = 15)]
    pub radius: usize,
}

impl GaborArgs {
    pub fn params(&self) -> GaborBankParams {
        GaborBankParams {
            scales: self.scales,
            orientations: self.orientations,
            u_low: self.ulow,
            u_high: self.uhigh,
            kernel_radius: self.radius,
        }
    }
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Image root; each image is labeled by its parent directory name.
    #[arg(long)]
    pub root: PathBuf,
    /// Index file to write.
    #[arg(long, alias = "index")]
    pub out: PathBuf,
    #[command(flatten)]
    pub gabor: GaborArgs,
    #[arg(long, default_value_t = DEFAULT_DISCRETIZATION_BINS)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Texture and color weights, `t,c`.
    #[arg(long, default_value = "0.5,0.5")]
    pub weights: Weights,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DISCRETIZATION_BINS)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Corpus root, one subdirectory per class.
    #[arg(long)]
    pub root: PathBuf,
    /// Training images per class, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [3, 6, 12])]
    pub training_sizes: Vec<usize>,
    /// Database sizes (total images), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [60, 90])]
    pub db_sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value = "0.5,0.5")]
    pub weights: Weights,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_DISCRETIZATION_BINS)]
    pub bins: usize,
    #[command(flatten)]
    pub gabor: GaborArgs,
    /// Also write the TSV report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub classes: usize,
    #[arg(long, default_value_t = 20)]
    pub per_class: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Executes one subcommand, writing its tab-separated output to `out`.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Index(args) => cmd_index(&args, out),
        Command::Query(args) => cmd_query(&args, out),
        Command::Reduce(args) => cmd_reduce(&args, out),
        Command::Evaluate(args) => cmd_evaluate(&args, out),
        Command::Synth(args) => cmd_synth(&args, out),
    }
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cmd_index(args: &IndexArgs, out: &mut impl Write) -> Result<()> {
    let (index, skipped) = build_index_with_report(&args.root, args.gabor.params(), args.bins)?;
    save_index(&index, &args.out)?;
    writeln!(out, "rows\t{}", index.len())?;
    writeln!(out, "columns\t{}", index.matrix().cols())?;
    writeln!(out, "skipped\t{skipped}")?;
    writeln!(out, "gamma_full\t{:.6}", index.gamma_full())?;
    writeln!(out, "gamma_reduct\t{:.6}", index.gamma_reduct())?;
    writeln!(out, "retained\t{}", join_ids(index.retained()))?;
    Ok(())
}

pub fn cmd_query(args: &QueryArgs, out: &mut impl Write) -> Result<()> {
    let index = load_index(&args.index)?;
    let extractor = FeatureExtractor::new(*index.params(), index.scheme())?;
    let features = extractor.extract_path(&args.query)?;
    for (i, hit) in rank(&features, &index, args.k, &args.weights)?
        .iter()
        .enumerate()
    {
        writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
            i + 1,
            hit.fused,
            hit.texture_norm,
            hit.color_norm,
            hit.label,
            hit.path
        )?;
    }
    Ok(())
}

pub fn cmd_reduce(args: &ReduceArgs, out: &mut impl Write) -> Result<()> {
    let mut index = load_index(&args.index)?;
    let reduct = index.recompute_reduct(args.bins)?;
    save_index(&index, &args.index)?;
    writeln!(
        out,
        "{:.6}\t{:.6}\t{}",
        reduct.gamma_full,
        reduct.gamma_reduct,
        join_ids(&reduct.retained)
    )?;
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs, out: &mut impl Write) -> Result<()> {
    let spec = ExperimentSpec {
        training_sizes: args.training_sizes.clone(),
        database_sizes: args.db_sizes.clone(),
        k: args.k,
        seed: args.seed,
        weights: args.weights,
        params: args.gabor.params(),
        bins: args.bins,
    };
    let tsv = run_experiment(&spec, &args.root)?.to_tsv();
    if let Some(path) = &args.out {
        std::fs::write(path, &tsv)?;
    }
    out.write_all(tsv.as_bytes())?;
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs, out: &mut impl Write) -> Result<()> {
    generate_synthetic_corpus(args.classes, args.per_class, args.seed, &args.out)?;
    writeln!(
        out,
        "wrote\t{}\timages\t{}",
        args.classes * args.per_class,
        args.out.display()
    )?;
    Ok(())
}
