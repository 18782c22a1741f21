mod diagnostics;
mod schedule;
mod sppa;

pub use diagnostics::{domain_distance_diagnostic, fejer_diagnostic, DomainDistanceSeries, FejerSeries};
pub use schedule::StepSchedule;
pub use sppa::{
    run, sppa_step, update_average, DiagnosticsConfig, RunReport, RunSummary, SppaState, TraceRow, TraceStride,
    AUTO_TRACE_ROWS,
};
