//! Command-line front end for the `navcast-core` forecasters: CSV ingestion,
//! synthetic fixtures, model files and report output.

pub mod cli;
pub mod error;
pub mod ingest;
pub mod model_io;
pub mod report;
pub mod synth;

pub use error::{CliError, Result};
