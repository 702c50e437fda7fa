use serde_json::json;

/// Failure reported as a one-line JSON object on stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub field: Option<String>,
    pub exit_code: i32,
}

impl CliError {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            message: message.into(),
            field: None,
            exit_code: 1,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            exit_code: 2,
            ..Self::new("usage", message)
        }
    }

    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.into()),
            ..Self::new("invalid_field", message)
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::new("io_error", format!("{}: {err}", path.display()))
    }

    pub fn to_json_line(&self) -> String {
        let mut v = json!({ "code": self.code, "message": self.message });
        if let Some(f) = &self.field {
            v["field"] = json!(f);
        }
        crate::output::canonical_string(&v, false)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<avarkit::Error> for CliError {
    fn from(e: avarkit::Error) -> Self {
        match &e {
            avarkit::Error::InvalidField { field, message } => {
                Self::field(field.clone(), message.clone())
            }
            _ => Self::new(e.code(), e.to_string()),
        }
    }
}
