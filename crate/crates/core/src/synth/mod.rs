//! Synthetic point-set benchmark: random instances with a planted
//! correspondence, scenario sweeps over noise, size, outliers and edge
//! density, and the accuracy/time statistics reported for them.

mod generator;
mod metrics;
mod scenario;

pub use generator::{generate_instance, GeneratorParams, PerturbationCount};
pub use metrics::{accuracy, fit_time_slope, least_squares_slope};
pub use scenario::{
    run_scenario, run_scenario_with_progress, summarize, Method, Mode, ScenarioKind, ScenarioSpec,
    SummaryRow, SweepPoint, TrialRecord,
};
