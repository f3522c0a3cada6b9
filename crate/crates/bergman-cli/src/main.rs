//! Certification runner for weighted composition operators on Bergman
//! spaces of the upper half-plane. Subcommands read a scenario TOML file,
//! drive the library, and emit a deterministic JSON or CSV report.
//!
//! Exit codes: 0 when the run reached a verdict (including negative ones),
//! 1 on validation or I/O failure, 2 when the numerics stayed inconclusive.

mod commands;
mod report;
mod scenario;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bergman",
    version,
    about = "Certify boundedness, compactness, and weighted estimates for weighted \
             composition operators on Bergman spaces of the half-plane"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Testing-condition sweep with a stability verdict.
    CheckBounded(RunArgs),
    /// Boundedness sweep plus vanishing probes along escape routes.
    CheckCompact(RunArgs),
    /// Operator norm power against the sparse form over a box collection.
    SparseBound(RunArgs),
    /// Class membership of a weight, with tent-mass profile.
    WeightClass(RunArgs),
    /// Norm estimate against the split-class constant of the weight.
    WeightedEstimate(RunArgs),
    /// Built-in oracle checks against closed forms.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Extra lattice refinement on top of the scenario's level.
    #[arg(long, default_value_t = 0)]
    refine: u32,
    /// Worker threads (0 keeps the library default).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct SelftestArgs {
    /// Worker threads (0 keeps the library default).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() {
    std::process::exit(run(Cli::parse()));
}

type Handler = fn(&scenario::Validated) -> Result<commands::Outcome, commands::CommandError>;

fn run(cli: Cli) -> i32 {
    let (args, handler): (RunArgs, Handler) = match cli.command {
        Command::Selftest(args) => return with_threads(args.threads, commands::selftest),
        Command::CheckBounded(args) => (args, commands::check_bounded),
        Command::CheckCompact(args) => (args, commands::check_compact),
        Command::SparseBound(args) => (args, commands::sparse_bound),
        Command::WeightClass(args) => (args, commands::weight_class),
        Command::WeightedEstimate(args) => (args, commands::weighted_estimate),
    };

    let mut validated = match scenario::load(&args.scenario) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    validated.lattice_refinement += args.refine;

    let outcome = match with_threads(args.threads, || handler(&validated)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    let text = match args.format {
        Format::Json => &outcome.json,
        Format::Csv => &outcome.csv,
    };
    if let Err(e) = write_output(args.out.as_deref(), text) {
        eprintln!("error: {e}");
        return 1;
    }

    if outcome.inconclusive {
        2
    } else {
        0
    }
}

/// Runs `f` inside a fixed-size thread pool when a count is given. The pool
/// only affects wall time: every reduction in the library is ordered, so
/// results are identical for any thread count.
fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction");
    pool.install(f)
}

fn write_output(out: Option<&std::path::Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}
