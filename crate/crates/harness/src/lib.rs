//! Experiment runner for fpp-core: spec files, seeded replicate-parallel
//! runs into JSON-lines record files, and summary reports.

pub mod error;
pub mod experiment;
pub mod record;
pub mod report;
pub mod run;
pub mod spec;

pub use error::{HarnessError, Result};
pub use record::{CellKey, Record};
pub use report::{report, summarize, Report, SummaryRow};
pub use run::{run, run_with_threads, RunSummary};
pub use spec::{Delta1, ExperimentKind, ExperimentSpec};
