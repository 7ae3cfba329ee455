//! Crate-wide error type and exit-code mapping.

use thiserror::Error;

/// Errors produced by parsing, configuration, and the statistical pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A requested window extends beyond the available data.
    #[error("window out of range: {0}")]
    Range(String),

    /// A malformed row or value in an input table.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A named column is absent from the table header.
    #[error("schema error: column {0:?} not found in header")]
    Schema(String),

    /// A configuration document failed validation.
    #[error("config error at key {key:?}: {message}")]
    Config { key: String, message: String },

    /// Input on which the requested statistic is undefined.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Effective degrees of freedom too small for the standard-error
    /// adjustment; the lag-1 coefficient is too close to 1 for this method.
    #[error("effective dof {n_eff} too small for standard-error adjustment (requires n_eff > 2)")]
    DofTooSmall { n_eff: f64 },

    /// A one-dimensional optimizer or root finder hit its iteration cap.
    #[error("no convergence after {iterations} iterations on bracket [{lo}, {hi}]")]
    NonConvergence { lo: f64, hi: f64, iterations: usize },

    /// Wraps an error from a rolling analysis with the end year that failed.
    #[error("end year {year}: {source}")]
    AtYear {
        year: i32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_year(year: i32, source: Error) -> Self {
        Error::AtYear {
            year,
            source: Box::new(source),
        }
    }

    /// Process exit code for the CLI contract: 2 for input errors, 3 for
    /// domain errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Schema(_) | Error::Config { .. } => 2,
            Error::Range(_)
            | Error::DegenerateInput(_)
            | Error::Domain(_)
            | Error::DofTooSmall { .. }
            | Error::NonConvergence { .. } => 3,
            Error::AtYear { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
