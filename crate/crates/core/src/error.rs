use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains no samples")]
    EmptyInput,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("non-finite value in channel `{channel}` at sample {index}")]
    NonFinite { channel: String, index: usize },

    #[error("series of {n_samples} samples is too short for any cluster time")]
    SeriesTooShort { n_samples: usize },

    #[error("grid does not match series: {0}")]
    GridMismatch(String),

    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("curve has {usable} usable points, at least {required} required")]
    TooFewPoints { usable: usize, required: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable identifier, used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyInput => "empty_input",
            Error::Parse { .. } => "parse_error",
            Error::Sampling(_) => "sampling_error",
            Error::NonFinite { .. } => "data_error",
            Error::SeriesTooShort { .. } => "series_too_short",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::InvalidField { .. } => "invalid_field",
            Error::TooFewPoints { .. } => "too_few_points",
            Error::Io(_) => "io_error",
            Error::Json(_) => "json_error",
        }
    }
}
