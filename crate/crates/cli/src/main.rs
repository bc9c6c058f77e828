use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use ulam_median::{ulam_distance, Dataset, Permutation, QueryOptions, StreamSketch};
use ulam_median_cli::bench;
use ulam_median_cli::error::CliError;
use ulam_median_cli::gen::{self, PlantedSpec};
use ulam_median_cli::report::fmt_number;
use ulam_median_cli::run::{solve, Mode, SolveArgs};

/// Exit codes: 0 success, 2 usage error, 3 data error, 4 budget error.
#[derive(Parser)]
#[command(name = "ulam-median", version, about = "k-median clustering of permutations under the Ulam metric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Offline,
    Stream,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Ulam distance between two single-permutation files.
    Dist { file_x: PathBuf, file_y: PathBuf },

    /// Generate a planted-cluster dataset plus a truth sidecar of centers.
    Gen {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        /// Comma-separated per-cluster point counts; must list k values.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Character moves applied to the center per point.
        #[arg(long, default_value_t = 0)]
        radius: usize,
        /// Uniform random outlier points appended before shuffling.
        #[arg(long, default_value_t = 0)]
        outliers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Truth sidecar path; defaults to `<out>.truth`.
        #[arg(long)]
        truth: Option<PathBuf>,
    },

    /// Solve k-median over a dataset file (offline or streaming).
    Kmedian {
        /// Dataset file; `-` reads the same format from stdin. Not needed
        /// with --snapshot-in.
        #[arg(required_unless_present = "snapshot_in")]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Outlier fraction in [0, 1); offline mode only.
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "offline")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stream-length bound; defaults to the dataset size.
        #[arg(long)]
        n_bound: Option<usize>,
        /// Bucket pruning coefficient override (streaming).
        #[arg(long)]
        beta: Option<f64>,
        /// Coreset accuracy parameter override (streaming).
        #[arg(long)]
        lambda: Option<f64>,
        /// Faraway sampling parameter override (streaming).
        #[arg(long)]
        rho: Option<f64>,
        /// Coreset block-size override (streaming).
        #[arg(long)]
        coreset_block: Option<usize>,
        /// Also run the exhaustive oracle and report the ratio.
        #[arg(long)]
        oracle: bool,
        /// Cap on candidate-subset enumeration.
        #[arg(long, default_value_t = ulam_median::cluster::DEFAULT_SELECT_BUDGET)]
        budget: u64,
        /// Over budget, fall back to greedy selection instead of erroring.
        #[arg(long)]
        greedy: bool,
        /// Write the sketch snapshot here (streaming).
        #[arg(long)]
        snapshot_out: Option<PathBuf>,
        /// Load a sketch snapshot and query it instead of streaming a file.
        #[arg(long)]
        snapshot_in: Option<PathBuf>,
    },

    /// Run a benchmark suite (default: the built-in desk suite).
    Bench {
        /// Suite file of key=value rows; omit for the built-in suite.
        #[arg(long)]
        suite: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

/// Prints one stdout line, exiting quietly with the conventional SIGPIPE
/// status when the reader has gone away (e.g. piping into `head`).
fn emit(line: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{line}").is_err() {
        std::process::exit(141);
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dist { file_x, file_y } => cmd_dist(file_x, file_y),
        Command::Gen {
            k,
            d,
            sizes,
            radius,
            outliers,
            seed,
            out,
            truth,
        } => cmd_gen(
            PlantedSpec {
                k,
                d,
                sizes,
                radius,
                outlier_count: outliers,
                seed,
            },
            out,
            truth,
        ),
        Command::Kmedian {
            file,
            k,
            p,
            mode,
            seed,
            n_bound,
            beta,
            lambda,
            rho,
            coreset_block,
            oracle,
            budget,
            greedy,
            snapshot_out,
            snapshot_in,
        } => {
            if let Some(path) = snapshot_in {
                return cmd_query_snapshot(path, budget, greedy);
            }
            let file = file.expect("clap enforces file unless --snapshot-in");
            let mode = match mode {
                ModeArg::Offline => Mode::Offline,
                ModeArg::Stream => Mode::Stream,
            };
            let mut args = SolveArgs::new(k, mode);
            args.p = p;
            args.seed = seed;
            args.n_bound = n_bound;
            args.beta = beta;
            args.lambda = lambda;
            args.rho = rho;
            args.coreset_block = coreset_block;
            args.oracle = oracle;
            args.budget = budget;
            args.greedy = greedy;
            args.want_snapshot = snapshot_out.is_some();
            cmd_kmedian(file, args, snapshot_out)
        }
        Command::Bench { suite } => cmd_bench(suite),
    }
}

/// First non-blank line of a file as a permutation.
fn read_permutation(path: &PathBuf) -> Result<Permutation, CliError> {
    let text = fs::read_to_string(path)?;
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| CliError::Data(format!("{}: empty file", path.display())))?;
    Permutation::parse_line(line)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_dist(file_x: PathBuf, file_y: PathBuf) -> Result<(), CliError> {
    let x = read_permutation(&file_x)?;
    let y = read_permutation(&file_y)?;
    let dist = ulam_distance(&x, &y).map_err(|e| CliError::Data(e.to_string()))?;
    emit(format_args!("{dist}"));
    Ok(())
}

fn cmd_gen(
    spec: PlantedSpec,
    out: PathBuf,
    truth: Option<PathBuf>,
) -> Result<(), CliError> {
    let instance = gen::generate(&spec)?;
    let truth_path = truth.unwrap_or_else(|| {
        let mut p = out.clone().into_os_string();
        p.push(".truth");
        PathBuf::from(p)
    });
    instance.dataset.write(&out)?;
    fs::write(&truth_path, gen::truth_text(&instance))?;
    emit(format_args!(
        "wrote {} ({} points, d={}) and {}",
        out.display(),
        instance.dataset.len(),
        instance.dataset.dimension(),
        truth_path.display()
    ));
    Ok(())
}

fn read_dataset(path: &PathBuf) -> Result<Dataset, CliError> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut text)?;
        Ok(Dataset::parse(&text)?)
    } else {
        Ok(Dataset::read(path)?)
    }
}

fn cmd_kmedian(
    file: PathBuf,
    args: SolveArgs,
    snapshot_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let ds = read_dataset(&file)?;
    let name = file.display().to_string();
    let outcome = solve(&name, &ds, &args)?;

    for median in &outcome.medians {
        emit(format_args!("median {median}"));
    }
    emit(format_args!("objective {}", fmt_number(outcome.objective)));
    if args.p > 0.0 {
        let list = outcome
            .outliers
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        emit(format_args!("outliers {list}"));
    }
    emit(format_args!("{}", outcome.report.line()));

    if let Some(path) = snapshot_out {
        let text = outcome
            .snapshot
            .ok_or_else(|| CliError::Usage("--snapshot-out requires --mode stream".to_string()))?;
        fs::write(&path, text)?;
    }
    Ok(())
}

fn cmd_query_snapshot(path: PathBuf, budget: u64, greedy: bool) -> Result<(), CliError> {
    let text = fs::read_to_string(&path)?;
    let sketch = StreamSketch::from_snapshot_str(&text)?;
    let result = sketch.query(&QueryOptions {
        budget,
        greedy_fallback: greedy,
    })?;
    for median in result.medians.medians() {
        emit(format_args!("median {median}"));
    }
    emit(format_args!("objective {}", fmt_number(result.weighted_objective)));
    Ok(())
}

fn cmd_bench(suite: Option<PathBuf>) -> Result<(), CliError> {
    let rows = match suite {
        Some(path) => bench::parse_suite(&fs::read_to_string(&path)?)?,
        None => bench::default_suite(),
    };
    let outcome = bench::run_suite(&rows);
    emit(format_args!("{}", outcome.table));
    for report in &outcome.reports {
        emit(format_args!("{}", report.line()));
    }
    match outcome.failures.into_iter().next() {
        None => Ok(()),
        Some((_, e)) => Err(e),
    }
}
