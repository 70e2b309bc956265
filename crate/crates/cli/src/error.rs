use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        })
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

/// Turns a parameter field name into the flag that sets it.
pub fn flag_name(field: &str) -> String {
    match field {
        "n_mhh" | "n_mhp" | "n_suh" | "n_sup" | "t_mh" | "t_su" | "t_mhsu" | "icd_mh"
        | "icd_su" | "ratio" | "grid" | "within_spans" | "unit" | "span" | "n" | "t" => {
            format!("--{}", field.replace('_', "-"))
        }
        other => other.to_string(),
    }
}

impl From<dddm::Error> for CliError {
    fn from(err: dddm::Error) -> Self {
        match &err {
            dddm::Error::SpanExceedsConcurrentWindow { span_days, t_mhsu } => CliError::Validation(format!(
                "--t-mhsu: data spans {span_days} days, more than --t-mhsu {t_mhsu}; use detect-broad for windowed detection or pass --force"
            )),
            dddm::Error::InvalidParams(_) => CliError::Validation(
                err.field_errors()
                    .iter()
                    .map(|e| format!("{}: {}", flag_name(&e.field), e.message))
                    .collect::<Vec<_>>()
                    .join("; "),
            ),
            _ if err.is_validation() => CliError::Validation(err.to_string()),
            _ => CliError::Io(err.to_string()),
        }
    }
}
