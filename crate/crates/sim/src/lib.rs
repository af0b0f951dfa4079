//! Std companion to `hav-core`: file formats, a parallel batch runner and
//! the `hav-sim` command-line front end.
//!
//! File formats:
//!
//! * scenario files: one JSON document, see [`formats::ScenarioFile`];
//! * result logs: one [`hav_core::ExperimentRecord`] JSON object per line;
//! * traces: one CSV per vehicle, `step,hav,x1,y1,theta0..thetaN,v,phi`;
//! * reports: a JSON [`hav_core::SummaryReport`] plus one CSV per histogram.

pub mod batch;
pub mod error;
pub mod formats;

pub use batch::run_batch_parallel;
pub use error::Error;
