//! Scenario configuration, closed-loop runs, traces and reports.

mod config;
mod plot;
mod run;
mod trace;

pub use config::{
    ActuatorConfig, InitialConfig, NetworkConfig, ScenarioConfig, ScenarioKind, SetpointConfig,
};
pub use plot::emit_plots;
pub use run::{run_scenario, step_plan, SimRun};
pub use trace::{
    compare, effort, emit_csv, overshoot, settling_time, summarize, RunSummary, SimTrace, TraceRow,
    COLUMNS, SETTLING_BAND,
};
