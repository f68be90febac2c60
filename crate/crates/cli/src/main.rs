//! `chromaterm`: fit, apply, extend and evaluate ellipsoidal colour-naming models.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  usage error (bad arguments or flags)
  2  data or format error (missing files, undecodable images, malformed model/CSV, bad layout)
  3  numerical failure (a term could not be fitted)";

#[derive(Debug, Parser)]
#[command(
    name = "chromaterm",
    version,
    about = "Colour naming with fuzzy ellipsoidal categories in CIE L*a*b*"
)]
#[command(after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a model from a labelled image directory (<dir>/<term>/<image>, masks in <dir>/<term>/masks/)
    #[command(after_help = EXIT_CODES)]
    Fit(FitArgs),
    /// Name every pixel of an image and write an indexed label PNG
    #[command(after_help = EXIT_CODES)]
    Name(NameArgs),
    /// Add a new colour term learnt from a few masked example images
    #[command(after_help = EXIT_CODES)]
    Extend(ExtendArgs),
    /// Score a model on a Munsell chart or a labelled image dataset
    #[command(after_help = EXIT_CODES)]
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct FitOptions {
    /// Maximum optimiser iterations per local search
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    iterations: u64,
    /// Stop when the objective improves by less than this between iterations
    #[arg(long, default_value_t = 1e-3, value_parser = positive_f64)]
    tolerance: f64,
    /// Edge of the cubic L*a*b* bins used to build the ground truth
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    bin_size: f64,
    /// Seed for the randomised restarts
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra local searches from random orientations per term
    #[arg(long, default_value_t = 2)]
    restarts: usize,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Ground-truth directory
    gt_dir: PathBuf,
    /// Output model file (JSON)
    out: PathBuf,
    #[command(flatten)]
    options: FitOptions,
}

#[derive(Debug, Args)]
struct NameArgs {
    /// Model file
    model: PathBuf,
    /// Input image (PNG or PPM)
    input: PathBuf,
    /// Output label image (indexed PNG, one palette entry per term)
    out: PathBuf,
    /// Also write one greyscale belongingness map per term into DIR (<term>.png, value round(255*B))
    #[arg(long, value_name = "DIR")]
    maps: Option<PathBuf>,
    /// Stretch the achromatic terms towards the image's mean colour cast first, with gain κ (default 1)
    #[arg(long, value_name = "κ", num_args = 0..=1, default_missing_value = "1.0", value_parser = non_negative_f64)]
    adapt: Option<f64>,
}

#[derive(Debug, Args)]
struct ExtendArgs {
    /// Model file to extend
    model: PathBuf,
    /// Name of the new term
    name: String,
    /// Example images, or directories of them; masks are read from a sibling masks/ directory
    #[arg(required = true)]
    examples: Vec<PathBuf>,
    /// Output model file
    #[arg(short, long)]
    out: PathBuf,
    #[command(flatten)]
    options: FitOptions,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["munsell", "dataset"])))]
struct EvalArgs {
    /// Model file
    model: PathBuf,
    /// Chip table CSV (notation,L,a,b,row,column), or `bundled` for the built-in table
    #[arg(long, value_name = "CHART", requires = "reference")]
    munsell: Option<PathBuf>,
    /// Reference naming CSV (row,column,term) for --munsell
    #[arg(long, value_name = "CSV", requires = "munsell")]
    reference: Option<PathBuf>,
    /// Write the chart segmentation image (with --munsell)
    #[arg(long, value_name = "PNG", requires = "munsell")]
    render: Option<PathBuf>,
    /// Cell size in pixels for --render
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..=256))]
    cell: u32,
    /// Labelled dataset directory (<dir>/<term>/<image>, masks in <dir>/<term>/masks/)
    #[arg(long, value_name = "DIR", conflicts_with = "munsell")]
    dataset: Option<PathBuf>,
    /// Report unreadable or unscorable dataset items instead of failing
    #[arg(long, requires = "dataset")]
    allow_errors: bool,
    /// Write the confusion matrix as CSV
    #[arg(long, value_name = "CSV")]
    confusion: Option<PathBuf>,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

fn non_negative_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a non-negative number, got '{s}'")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Name(a) => commands::name(&a),
        Command::Extend(a) => commands::extend(&a),
        Command::Eval(a) => commands::eval(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
