//! File formats, parallel cross-validation and the `lkt` command line for
//! logistic knowledge tracing models built with [`lkt_core`].

pub mod cli;
pub mod error;
pub mod ingest;
pub mod output;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
pub use ingest::{load_datashop, read_datashop, write_tsv, ColumnMap};
