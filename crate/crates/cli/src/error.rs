//! CLI error classes and their exit codes: 0 success, 2 usage, 3 data,
//! 4 budget.

use thiserror::Error;
use ulam_median::{ClusterError, DatasetError, PermError, StreamError};

use crate::gen::GenError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PermError> for CliError {
    fn from(e: PermError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            ClusterError::InvalidK { .. } | ClusterError::InvalidOutlierFraction(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<StreamError> for CliError {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            StreamError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Dataset(inner) => CliError::Data(inner.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}
