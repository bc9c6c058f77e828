//! Benchmark suites: planted instances run through the solvers, rendered
//! as an aligned table plus one machine-readable report line per run.

use crate::error::CliError;
use crate::gen::{generate, PlantedSpec};
use crate::report::{fmt_number, RunReport};
use crate::run::{solve, Mode, SolveArgs};

#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub name: String,
    pub algo: Mode,
    pub k: usize,
    pub d: usize,
    pub sizes: Vec<usize>,
    pub radius: usize,
    pub outliers: usize,
    pub p: f64,
    pub seed: u64,
    pub oracle: bool,
}

/// Small oracle-backed instances; every ratio cell should come out at 2.0
/// or below.
pub fn default_suite() -> Vec<SuiteRow> {
    vec![
        SuiteRow {
            name: "median-n8".into(),
            algo: Mode::Offline,
            k: 1,
            d: 6,
            sizes: vec![8],
            radius: 2,
            outliers: 0,
            p: 0.0,
            seed: 11,
            oracle: true,
        },
        SuiteRow {
            name: "kmedian-n6".into(),
            algo: Mode::Offline,
            k: 2,
            d: 5,
            sizes: vec![3, 3],
            radius: 1,
            outliers: 0,
            p: 0.0,
            seed: 12,
            oracle: true,
        },
        SuiteRow {
            name: "outlier-n8".into(),
            algo: Mode::Offline,
            k: 1,
            d: 5,
            sizes: vec![6],
            radius: 1,
            outliers: 2,
            p: 0.25,
            seed: 13,
            oracle: true,
        },
        SuiteRow {
            name: "stream-1med".into(),
            algo: Mode::Stream,
            k: 1,
            d: 6,
            sizes: vec![12],
            radius: 1,
            outliers: 0,
            p: 0.0,
            seed: 14,
            oracle: true,
        },
    ]
}

/// One row per non-comment line of `key=value` pairs. Recognized keys:
/// name, algo, k, d, sizes (comma list), radius, outliers, p, seed, oracle.
pub fn parse_suite(text: &str) -> Result<Vec<SuiteRow>, CliError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = i + 1;
        let mut row = SuiteRow {
            name: format!("row{line_no}"),
            algo: Mode::Offline,
            k: 1,
            d: 6,
            sizes: vec![8],
            radius: 1,
            outliers: 0,
            p: 0.0,
            seed: 0,
            oracle: false,
        };
        let mut sizes_given = false;
        for token in line.split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("suite line {line_no}: expected key=value, got {token:?}"))
            })?;
            let bad = |what: &str| {
                CliError::Usage(format!("suite line {line_no}: bad {what} {value:?}"))
            };
            match key {
                "name" => row.name = value.to_string(),
                "algo" => {
                    row.algo = match value {
                        "offline" => Mode::Offline,
                        "stream" => Mode::Stream,
                        _ => return Err(bad("algo")),
                    }
                }
                "k" => row.k = value.parse().map_err(|_| bad("k"))?,
                "d" => row.d = value.parse().map_err(|_| bad("d"))?,
                "sizes" => {
                    row.sizes = value
                        .split(',')
                        .map(|v| v.parse())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("sizes"))?;
                    sizes_given = true;
                }
                "radius" => row.radius = value.parse().map_err(|_| bad("radius"))?,
                "outliers" => row.outliers = value.parse().map_err(|_| bad("outliers"))?,
                "p" => row.p = value.parse().map_err(|_| bad("p"))?,
                "seed" => row.seed = value.parse().map_err(|_| bad("seed"))?,
                "oracle" => {
                    row.oracle = match value {
                        "1" | "true" => true,
                        "0" | "false" => false,
                        _ => return Err(bad("oracle")),
                    }
                }
                _ => return Err(CliError::Usage(format!(
                    "suite line {line_no}: unknown key {key:?}"
                ))),
            }
        }
        if !sizes_given {
            row.sizes = vec![8; row.k];
        }
        rows.push(row);
    }
    Ok(rows)
}

pub struct SuiteOutcome {
    pub table: String,
    pub reports: Vec<RunReport>,
    pub failures: Vec<(String, CliError)>,
}

pub fn run_suite(rows: &[SuiteRow]) -> SuiteOutcome {
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut lines = vec![format!(
        "{:<14} {:<16} {:>6} {:>3} {:>5} {:>10} {:>8} {:>9} {:>9} {:>8}",
        "name", "algo", "n", "k", "p", "objective", "oracle", "ratio", "fallback", "wall_ms"
    )];

    for row in rows {
        match run_row(row) {
            Ok(report) => {
                lines.push(format!(
                    "{:<14} {:<16} {:>6} {:>3} {:>5} {:>10} {:>8} {:>9} {:>9} {:>8}",
                    report.name,
                    report.algo,
                    report.n,
                    report.k,
                    report.p,
                    fmt_number(report.objective),
                    report
                        .oracle
                        .map(|o| o.to_string())
                        .unwrap_or_else(|| "-".into()),
                    report
                        .ratio()
                        .map(|r| format!("{r:.4}"))
                        .unwrap_or_else(|| "-".into()),
                    report.used_fallback as u8,
                    report.wall_ms
                ));
                reports.push(report);
            }
            Err(e) => {
                lines.push(format!("{:<14} FAILED: {e}", row.name));
                failures.push((row.name.clone(), e));
            }
        }
    }
    SuiteOutcome {
        table: lines.join("\n"),
        reports,
        failures,
    }
}

fn run_row(row: &SuiteRow) -> Result<RunReport, CliError> {
    let spec = PlantedSpec {
        k: row.k,
        d: row.d,
        sizes: row.sizes.clone(),
        radius: row.radius,
        outlier_count: row.outliers,
        seed: row.seed,
    };
    let instance = generate(&spec)?;
    let mut args = SolveArgs::new(row.k, row.algo);
    args.p = row.p;
    args.seed = row.seed;
    args.oracle = row.oracle;
    let outcome = solve(&row.name, &instance.dataset, &args)?;
    Ok(outcome.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_gives_header_only_table() {
        let outcome = run_suite(&[]);
        assert_eq!(outcome.table.lines().count(), 1);
        assert!(outcome.reports.is_empty());
        assert!(outcome.failures.is_empty());
    }

    #[test]
    fn suite_parsing_roundtrip() {
        let rows = parse_suite(
            "# comment\n\
             name=a algo=offline k=2 d=5 sizes=3,4 radius=1 outliers=1 p=0.25 seed=9 oracle=1\n\
             \n\
             name=b algo=stream k=1 d=6 sizes=10 radius=0 seed=3\n",
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].sizes, vec![3, 4]);
        assert!(rows[0].oracle);
        assert_eq!(rows[1].algo, Mode::Stream);
        assert!(!rows[1].oracle);

        assert!(parse_suite("name=x algo=warp\n").is_err());
        assert!(parse_suite("nonsense\n").is_err());
    }

    #[test]
    fn default_suite_ratios_stay_within_two() {
        let outcome = run_suite(&default_suite());
        assert!(outcome.failures.is_empty(), "failures: {:?}", outcome.failures);
        for report in &outcome.reports {
            let ratio = report.ratio().expect("oracle-backed suite");
            assert!(
                (1.0..=2.0).contains(&ratio),
                "{}: ratio {ratio} out of range",
                report.name
            );
        }
    }
}
