//! Shared solver driver behind the `kmedian` subcommand and the bench
//! harness: runs a dataset through the offline or streaming pipeline and
//! packages the answer with its report.

use std::time::Instant;

use ulam_median::{
    approx_k_median_with, brute_force_k_median, Dataset, Permutation, QueryOptions,
    SelectOptions, StreamConfig, StreamSketch,
};

use crate::error::CliError;
use crate::report::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Offline,
    Stream,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Offline => "offline",
            Mode::Stream => "stream",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveArgs {
    pub k: usize,
    pub p: f64,
    pub mode: Mode,
    pub seed: u64,
    pub n_bound: Option<usize>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub coreset_block: Option<usize>,
    pub budget: u64,
    pub greedy: bool,
    pub oracle: bool,
    pub want_snapshot: bool,
}

impl SolveArgs {
    pub fn new(k: usize, mode: Mode) -> Self {
        Self {
            k,
            p: 0.0,
            mode,
            seed: 0,
            n_bound: None,
            beta: None,
            lambda: None,
            rho: None,
            coreset_block: None,
            budget: ulam_median::cluster::DEFAULT_SELECT_BUDGET,
            greedy: false,
            oracle: false,
            want_snapshot: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub medians: Vec<Permutation>,
    pub objective: f64,
    pub outliers: Vec<usize>,
    pub report: RunReport,
    /// Snapshot text for stream runs, for `--snapshot-out`.
    pub snapshot: Option<String>,
}

pub fn solve(name: &str, ds: &Dataset, args: &SolveArgs) -> Result<SolveOutcome, CliError> {
    let started = Instant::now();
    let mut outcome = match args.mode {
        Mode::Offline => solve_offline(ds, args)?,
        Mode::Stream => solve_stream(ds, args)?,
    };

    let oracle = if args.oracle {
        Some(brute_force_k_median(ds, args.k, args.p)?.objective)
    } else {
        None
    };

    outcome.report = RunReport {
        name: name.to_string(),
        algo: outcome.report.algo.clone(),
        d: ds.dimension(),
        n: ds.len(),
        k: args.k,
        p: args.p,
        seed: args.seed,
        objective: outcome.objective,
        oracle,
        peak_stored: outcome.report.peak_stored,
        used_fallback: outcome.report.used_fallback,
        wall_ms: started.elapsed().as_millis(),
    };
    Ok(outcome)
}

fn blank_report(algo: &str, peak_stored: Option<usize>, used_fallback: bool) -> RunReport {
    RunReport {
        name: String::new(),
        algo: algo.to_string(),
        d: 0,
        n: 0,
        k: 0,
        p: 0.0,
        seed: 0,
        objective: 0.0,
        oracle: None,
        peak_stored,
        used_fallback,
        wall_ms: 0,
    }
}

fn solve_offline(ds: &Dataset, args: &SolveArgs) -> Result<SolveOutcome, CliError> {
    let opts = SelectOptions {
        budget: args.budget,
        greedy_fallback: args.greedy,
    };
    let result = approx_k_median_with(ds, args.k, args.p, &opts)?;
    Ok(SolveOutcome {
        medians: result.medians.medians().to_vec(),
        objective: result.objective as f64,
        outliers: result.outliers,
        report: blank_report("offline-kmedian", None, result.used_fallback),
        snapshot: None,
    })
}

fn solve_stream(ds: &Dataset, args: &SolveArgs) -> Result<SolveOutcome, CliError> {
    if args.p > 0.0 {
        return Err(CliError::Usage(
            "outliers (p > 0) require --mode offline".to_string(),
        ));
    }
    let n_bound = args.n_bound.unwrap_or(ds.len());
    let mut config = StreamConfig::new(args.k, ds.dimension(), n_bound, args.seed);
    if let Some(beta) = args.beta {
        config = config.with_beta(beta);
    }
    if let Some(lambda) = args.lambda {
        config = config.with_lambda(lambda);
    }
    if let Some(rho) = args.rho {
        config = config.with_rho(rho);
    }
    if let Some(block) = args.coreset_block {
        config = config.with_coreset_block(block);
    }

    let mut sketch = StreamSketch::init(config)?;
    for p in ds.points() {
        sketch.update(p.clone())?;
    }
    let result = sketch.query(&QueryOptions {
        budget: args.budget,
        greedy_fallback: args.greedy,
    })?;
    let stats = sketch.stats();
    Ok(SolveOutcome {
        medians: result.medians.medians().to_vec(),
        objective: result.weighted_objective,
        outliers: Vec::new(),
        report: blank_report(
            "stream-kmedian",
            Some(stats.peak_stored),
            result.used_fallback,
        ),
        snapshot: args.want_snapshot.then(|| sketch.snapshot_string()),
    })
}
