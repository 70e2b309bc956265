//! Summary statistics, parameter sweeps and temporal trends over detection
//! output, plus CSV/SVG emission of the resulting series.

mod export;
mod summary;
mod sweep;
mod temporal;

pub use export::{sweep_svg, temporal_svg, write_sweep_csv, write_temporal_csv};
pub use summary::{format_proportion, summarize, SummaryStats, SUMMARY_HEADER};
pub use sweep::{
    sweep_concurrent_span, sweep_visit_counts, sweep_within_span, SweepKind, SweepPoint,
    SweepSeries, DEFAULT_WITHIN_SPANS,
};
pub use temporal::{
    temporal_analysis, Statistic, TemporalBucket, TemporalResult, TemporalSpec, TimeUnit,
};
