use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use caliper_match::{CaliperSpec, ProcessingOrder, SimConfig};
use caliper_match_cli::{
    cmd_match, cmd_min_caliper, cmd_simulate, read_caliper_file, CliError, InputTable, Mode,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Caliper matching of treated and control groups on a scalar score.
///
/// Exit status: 0 success, 1 I/O failure, 2 invalid input, 3 infeasible target.
#[derive(Parser)]
#[command(name = "caliper-match", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match treated to control rows and print the pairs as CSV.
    Match(MatchArgs),
    /// Find the smallest constant caliper matching a fraction of the smaller group.
    MinCaliper(MinCaliperArgs),
    /// Compare maximal, greedy and rematched greedy matching on uniform scores.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    OneToOne,
    OneToN,
    GnnmSorted,
    GnnmTree,
    Complete,
    AntiComplete,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    AsGiven,
    Sorted,
    Random,
}

impl OrderArg {
    fn with_seed(self, seed: u64) -> ProcessingOrder {
        match self {
            OrderArg::AsGiven => ProcessingOrder::AsGiven,
            OrderArg::Sorted => ProcessingOrder::Sorted,
            OrderArg::Random => ProcessingOrder::Random { seed },
        }
    }
}

#[derive(Args)]
struct MatchArgs {
    /// CSV with header and columns id, group (treated/control), score.
    #[arg(long, short)]
    input: PathBuf,
    /// Constant caliper width.
    #[arg(long, conflicts_with = "caliper")]
    width: Option<f64>,
    /// Caliper file (constant, separable or step-sum).
    #[arg(long)]
    caliper: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "one-to-one")]
    mode: ModeArg,
    /// Controls per treated row for --mode one-to-n.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Treated processing order for --mode gnnm-tree.
    #[arg(long, value_enum, default_value = "as-given")]
    order: OrderArg,
    /// Seed for --order random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Re-pair the matched rows by rank after matching.
    #[arg(long)]
    rematch: bool,
    /// Write pairs here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MinCaliperArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Fraction of min(treated, control) that must be matched, in (0, 1].
    #[arg(long)]
    target: f64,
    /// Bisection steps.
    #[arg(long, default_value_t = 20)]
    iterations: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// Size of each group.
    #[arg(long, default_value_t = 100)]
    group_size: usize,
    /// Constant caliper for maximal matching.
    #[arg(long, default_value_t = 0.015)]
    caliper_a: f64,
    /// Constant caliper for greedy nearest-neighbor matching.
    #[arg(long, default_value_t = 0.02)]
    caliper_gnnm: f64,
    #[arg(long, default_value_t = 2000)]
    replications: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Treated processing order for greedy matching.
    #[arg(long, value_enum, default_value = "as-given")]
    order: OrderArg,
    /// Seed for --order random.
    #[arg(long, default_value_t = 0)]
    order_seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Match(a) => {
            let table = InputTable::read_path(&a.input)?;
            let caliper = match (a.width, &a.caliper) {
                (Some(w), _) => {
                    if !w.is_finite() || w < 0.0 {
                        return Err(CliError::Usage(format!(
                            "--width must be finite and nonnegative, got {w}"
                        )));
                    }
                    Some(CaliperSpec::constant(w))
                }
                (None, Some(path)) => Some(read_caliper_file(path)?),
                (None, None) => None,
            };
            let mode = match a.mode {
                ModeArg::OneToOne => Mode::OneToOne,
                ModeArg::OneToN => Mode::OneToN(a.n),
                ModeArg::GnnmSorted => Mode::GnnmSorted,
                ModeArg::GnnmTree => Mode::GnnmTree(a.order.with_seed(a.seed)),
                ModeArg::Complete => Mode::Complete,
                ModeArg::AntiComplete => Mode::AntiComplete,
            };
            match &a.output {
                Some(path) => {
                    let file = std::fs::File::create(path).map_err(|source| CliError::Write {
                        path: path.clone(),
                        source,
                    })?;
                    cmd_match(&table, caliper.as_ref(), mode, a.rematch, file)?;
                }
                None => {
                    cmd_match(&table, caliper.as_ref(), mode, a.rematch, io::stdout().lock())?;
                }
            }
        }
        Command::MinCaliper(a) => {
            let table = InputTable::read_path(&a.input)?;
            cmd_min_caliper(&table, a.target, a.iterations, io::stdout().lock())?;
        }
        Command::Simulate(a) => {
            let config = SimConfig {
                order: a.order.with_seed(a.order_seed),
                ..SimConfig::new(a.group_size, a.caliper_a, a.caliper_gnnm, a.replications, a.seed)
            };
            let summary = cmd_simulate(&config, &a.out_dir)?;
            println!("algorithm,mean_pairs,mean_max_distance,mean_avg_distance");
            for (name, s) in summary.algorithms() {
                println!(
                    "{name},{:.4},{:.6},{:.6}",
                    s.mean_pairs, s.mean_max_distance, s.mean_avg_distance
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
