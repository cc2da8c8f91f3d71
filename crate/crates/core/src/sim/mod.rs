//! Experiment harness: configuration, frame-parallel Monte Carlo, sweeps,
//! tracking runs and the analytic validation suite.

mod config;
mod report;
mod runner;
mod stats;
mod track;
mod validate;

pub use config::{Derived, ExperimentConfig, PowerReference, SweepAxis, SweepSpec, TurbulenceConfig};
pub use report::{results_csv, to_json, write_output, CSV_HEADER};
pub use runner::{frame_rng, run_point, run_sweep, simulate_window, Execution, PointResult, PointSummary, SweepResult};
pub use stats::{wilson_interval, BerEstimate};
pub use track::{run_track, TrackRecord, TrackRun};
pub use validate::{
    ml_ber_check, power_for_ber, validate_analytics, validate_analytics_with, CheckResult, ThresholdFn,
    ValidationHooks, ValidationPlan, ValidationReport,
};

/// Crate version, with the `git describe` output of the build tree when available.
pub fn version() -> String {
    match option_env!("FSOLINK_GIT_DESCRIBE") {
        Some(d) if !d.is_empty() => format!("fsolink {} ({d})", env!("CARGO_PKG_VERSION")),
        _ => format!("fsolink {}", env!("CARGO_PKG_VERSION")),
    }
}
