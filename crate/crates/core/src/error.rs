use alloc::string::String;

use crate::spec::SpecError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model specification: {0}")]
    Spec(#[from] SpecError),
    #[error("column {0:?} is not present in the dataset")]
    MissingColumn(String),
    #[error("column {column:?} holds a non-numeric value {value:?}")]
    NonNumeric { column: String, value: String },
    #[error("dataset is empty after {stage}")]
    EmptyDataset { stage: String },
    #[error("events out of time order for student {student:?}")]
    Sequencing { student: String },
    #[error("parameter {name} of term {term} is not bound to a value")]
    UnboundParameter { term: usize, name: String },
    #[error("parameter {name} = {value} of term {term} is outside its bounds")]
    ParameterOutOfBounds {
        term: usize,
        name: String,
        value: f64,
    },
    #[error("metric is undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable machine-readable class for the error.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Spec(_) => "spec",
            Error::MissingColumn(_) | Error::NonNumeric { .. } => "schema",
            Error::EmptyDataset { .. } => "dataset",
            Error::Sequencing { .. } => "sequencing",
            Error::UnboundParameter { .. } | Error::ParameterOutOfBounds { .. } => "contract",
            Error::UndefinedMetric(_) => "metric",
            Error::Config(_) => "config",
            Error::Numerical(_) => "numerical",
        }
    }
}
