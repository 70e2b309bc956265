//! Detection of mental health (MH), substance use (SU) and concurrent MHSU
//! status from administrative visit records, using visit-count thresholds
//! and maximum time spans.
//!
//! The crate covers the whole pipeline: reading and validating visit CSVs,
//! splitting large datasets, the four detection routines, summary counts,
//! parameter sweeps, temporal trends, and a generator for the simulated
//! seven-cohort reference dataset.
//!
//! ```
//! use dddm::{detect, simgen, analytics, DddmParams};
//!
//! let records = simgen::sample_dataset();
//! let rows = detect::mhsu_status_basic(&records, &DddmParams::default(), detect::SpanCheck::Enforce).unwrap();
//! assert_eq!(analytics::summarize(&rows).render_row(), "125 0.625 125 0.625 100 0.500");
//! ```

pub mod analytics;
pub mod detect;
mod error;
pub mod icd;
pub mod ingest;
mod params;
mod record;
pub mod simgen;
pub mod split;
mod status;

pub use error::{Error, FieldError, Result};
pub use icd::{CodeSet, IcdCode};
pub use params::{Condition, DddmParams, RawParams, StreamCriteria};
pub use record::{date_range, day_number, span_days, ClientId, VisitRecord};
pub use status::{Status, StatusRecord, TableLayout};
