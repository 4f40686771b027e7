//! Monte-Carlo experiments, rate fits, Value-at-Risk and reporting.

pub mod experiment;
pub mod fit;
pub mod report;
pub mod var;

pub use experiment::{
    geometric_grid, replication_seed, run_experiment, run_experiment_detailed,
    run_experiment_with_threads, Aggregate, EnvelopeChoice, ExperimentOutput, ReportMetadata,
    ReportRow, ReportTable, RunConfig, Statistic,
};
pub use fit::{fit_points, fit_rate, RateFit};
pub use report::{emit_report, Format, Report};
pub use var::{log_returns, parse_series, read_series, var_estimate, SeriesKind, VarEstimate};
