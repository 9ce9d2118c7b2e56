//! `locfex` command-line front end.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "locfex", version, about = "Localized Fourier extension: fits, sweeps, tables and singularity detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a function and write coefficients and per-subinterval errors.
    Fit(FitArgs),
    /// Fit a function and evaluate the approximant at given or random points.
    Eval(EvalArgs),
    /// Run a one-parameter sweep described by a JSON or TOML file.
    Sweep(SweepArgs),
    /// Search for T1(gamma) and N0(T) and compare with the reference tables.
    Tables(Common),
    /// Run the worked examples.
    Examples(ExamplesArgs),
    /// Detect, localize and correct singular subintervals.
    Singular(SingularArgs),
    /// Time the fit stage for several K.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory.
    #[arg(long, env = "LOCFEX_OUT", default_value = "locfex-out")]
    out: PathBuf,
    /// Also render SVG plots from the written CSVs.
    #[arg(long)]
    plot: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Seed for randomized sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
struct SourceArgs {
    /// Corpus function, `name[:key=value,...]`.
    #[arg(long = "fn", group = "source")]
    function: Option<String>,
    /// CSV file with columns x,re[,im].
    #[arg(long, group = "source")]
    data: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    /// Number of uniform subintervals.
    #[arg(long = "K", conflicts_with = "breakpoints")]
    k: Option<usize>,
    /// Interior breakpoints, comma separated; domain endpoints are ignored.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    breakpoints: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Extension factor.
    #[arg(long = "T", default_value_t = locfex::frame::DEFAULT_T)]
    t: f64,
    /// Oversampling ratio.
    #[arg(long, default_value_t = locfex::frame::DEFAULT_GAMMA)]
    gamma: f64,
    /// Half bandwidth.
    #[arg(long = "N", default_value_t = locfex::frame::DEFAULT_N)]
    n: usize,
    /// Singular value cutoff.
    #[arg(long, default_value_t = locfex::frame::DEFAULT_EPSILON)]
    eps: f64,
    /// Error grid refinement per node spacing.
    #[arg(long, default_value_t = locfex::experiments::DEFAULT_REFINE)]
    refine: usize,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    partition: PartitionArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Evaluation points, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "samples")]
    x: Option<Vec<f64>>,
    /// Number of uniformly random evaluation points drawn with `--seed`.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep description (`.toml`, otherwise JSON).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ExamplesArgs {
    /// Example number 1 to 4; all when omitted.
    #[arg(long)]
    id: Option<u8>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SingularArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Flag subintervals whose coefficient norm exceeds this multiple of the median.
    #[arg(long, default_value_t = locfex::singularity::DetectionPolicy::DEFAULT_RELATIVE_THRESHOLD)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// K values, comma separated and strictly increasing.
    #[arg(long = "K", value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Corpus function to fit.
    #[arg(long = "fn", default_value = "f1")]
    function: String,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Eval(a) => commands::eval(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Tables(a) => commands::tables(a),
        Command::Examples(a) => commands::examples(a),
        Command::Singular(a) => commands::singular(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { 2 } else { 3 })
        }
    }
}
