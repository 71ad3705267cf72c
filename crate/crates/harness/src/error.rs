use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// The config text is not valid TOML or has the wrong shape.
    #[error("parse error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), key.as_ref().map(|k| format!(" (key `{k}`)")).unwrap_or_default())]
    Parse { line: Option<usize>, key: Option<String>, message: String },
    #[error("scenario `{scenario}`, field `{field}`: {message}")]
    Validation { scenario: String, field: String, message: String },
    #[error("trace schema: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] gradflow::Error),
}

impl HarnessError {
    pub(crate) fn validation(scenario: &str, field: &str, message: impl Into<String>) -> Self {
        HarnessError::Validation { scenario: scenario.to_string(), field: field.to_string(), message: message.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Config problems map to exit code 2.
    pub fn is_config_error(&self) -> bool {
        matches!(self, HarnessError::Parse { .. } | HarnessError::Validation { .. })
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// First backquoted token of a serde message, e.g. the field in "unknown field `x`".
pub(crate) fn quoted_key(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}
