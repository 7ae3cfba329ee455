//! Trend-consistency testing for monthly climate series.
//!
//! The library fits OLS trends on a mean-centered decadal time axis,
//! corrects the trend standard error for lag-1 autocorrelation of the
//! residuals through an effective-degrees-of-freedom adjustment, and tests
//! the observed trend against a model-ensemble mean (or against zero) with
//! modified two-sample statistics evaluated on a Student-t distribution
//! with fractional degrees of freedom.
//!
//! Modules follow the pipeline:
//!
//! - [`series`]: monthly series, calendar windows, the centered time axis
//! - [`ingest`]: table and configuration parsing
//! - [`trend`]: OLS fit and confidence intervals
//! - [`autocorr`]: AR1 estimation and effective-dof corrections
//! - [`stats`]: the d-statistics, combined dof, and significance classes
//! - [`analysis`]: rolling evaluation, replication diffs, Monte Carlo size
//! - [`cli`]: the `trendtest` command-line interface
//!
//! Everything is deterministic: simulation draws come from an explicitly
//! seeded ChaCha8 stream and every operation is a pure function of its
//! inputs, safe to call concurrently.

// `!(x > 0.0)`-style guards are used deliberately throughout: unlike
// `x <= 0.0` they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod autocorr;
pub mod cli;
pub mod error;
pub mod format;
pub mod ingest;
pub mod series;
pub mod stats;
pub mod student_t;
pub mod trend;

pub use analysis::{
    evaluate_endpoint, evaluate_endpoint_with, generate_ar1_series, monte_carlo_size,
    replicate_from_reported, replicate_report, rolling_analysis, rolling_analysis_with,
    EndpointRow, PipelineOptions, ReplicationDiff, SizeReport,
};
pub use autocorr::{
    adjust_se, effective_dof_nychka, effective_dof_quenouille, estimate_ar1, Ar1Estimate,
    Ar1Method, DofAdjustment, DofFormula,
};
pub use error::{Error, Result};
pub use ingest::{
    canonical_tsv, level_for_label, load_config, parse_table, AnalysisConfig, ColumnTableSpec,
    Level, ReportedRow, Tolerances,
};
pub use series::{MonthlySeries, TimeAxis};
pub use stats::{
    classify, d1_star, d1_zero, d_star, evaluate_tests, welch_df, EnsembleStats,
    LevelClassification, Significance, TestResult,
};
pub use student_t::{t_cdf, t_quantile};
pub use trend::{fit_trend, trend_ci, TrendFit};
