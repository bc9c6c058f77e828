//! Library side of the `ulam-median` CLI: planted-instance generation,
//! solver driving, reports, and benchmark suites. The binary in `main.rs`
//! is a thin argument-parsing layer over these modules.

pub mod bench;
pub mod error;
pub mod gen;
pub mod report;
pub mod run;

pub use error::CliError;
pub use gen::{generate, PlantedInstance, PlantedSpec};
pub use report::RunReport;
pub use run::{solve, Mode, SolveArgs, SolveOutcome};
