use std::fmt;

use serde::{Deserialize, Serialize};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single invalid field, named the way callers spell it (`n_mhh`, `icd_su`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid ICD code {code:?}: {reason}")]
    InvalidIcdCode { code: String, reason: &'static str },

    #[error("invalid parameters: {}", join_fields(.0))]
    InvalidParams(Vec<FieldError>),

    #[error(
        "data span of {span_days} days exceeds t_mhsu = {t_mhsu}; use the broad (windowed) detection or force the basic run"
    )]
    SpanExceedsConcurrentWindow { span_days: i64, t_mhsu: u32 },

    #[error("input contains no visit records")]
    EmptyInput,

    #[error("missing required column {0:?}")]
    MissingColumn(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid cohort spec for group {group_id}: {message}")]
    InvalidCohort { group_id: u32, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad caller input rather than I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_)) && !matches!(self, Error::Csv(e) if e.is_io_error())
    }

    /// Field-level view of the error, used for machine-readable reports.
    pub fn field_errors(&self) -> Vec<FieldError> {
        match self {
            Error::InvalidParams(fields) => fields.clone(),
            Error::SpanExceedsConcurrentWindow { .. } => {
                vec![FieldError::new("t_mhsu", self.to_string())]
            }
            Error::Parse { line, message } => {
                vec![FieldError::new(format!("line {line}"), message.clone())]
            }
            Error::MissingColumn(col) => vec![FieldError::new(*col, "missing required column")],
            other => vec![FieldError::new("input", other.to_string())],
        }
    }
}

fn join_fields(fields: &[FieldError]) -> String {
    fields
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
