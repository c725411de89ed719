use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("unknown experiment {name:?}{}", suggestion.as_ref().map(|s| format!("; did you mean {s:?}?")).unwrap_or_default())]
    UnknownExperiment { name: String, suggestion: Option<String> },

    #[error("invalid grid {0}")]
    Grid(String),

    #[error("{0}")]
    Config(String),

    #[error("manifest field `{field}`: {message}")]
    Manifest { field: String, message: String },

    #[error(transparent)]
    Model(#[from] martapprox::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}
