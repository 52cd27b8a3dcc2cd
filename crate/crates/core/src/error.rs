use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("out-of-vocabulary token {0:?}")]
    Oov(String),

    #[error("degenerate vector: {0}")]
    DegenerateVector(String),

    #[error("shape mismatch: expected dimension {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("empty text: {0:?} has no tokens")]
    EmptyText(String),

    #[error("no in-vocabulary tokens in {text:?} ({oov} skipped)")]
    NoContent { text: String, oov: usize },

    #[error("unanswerable: provider cannot embed {0:?}")]
    Unanswerable(String),

    #[error("degenerate target: c + b - a is the zero vector")]
    DegenerateTarget,

    #[error("invalid question {id}: {message}")]
    InvalidQuestion { id: String, message: String },

    #[error("dataset build error: {0}")]
    Build(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("linkage error: {0}")]
    Linkage(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("json error at line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }

    /// Stable short name of the variant, used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::EmptyInput(_) => "empty-input",
            Error::Oov(_) => "oov",
            Error::DegenerateVector(_) => "degenerate-vector",
            Error::Shape { .. } => "shape",
            Error::EmptyText(_) => "empty-text",
            Error::NoContent { .. } => "no-content",
            Error::Unanswerable(_) => "unanswerable",
            Error::DegenerateTarget => "degenerate-target",
            Error::InvalidQuestion { .. } => "invalid-question",
            Error::Build(_) => "build",
            Error::Template(_) => "template",
            Error::Linkage(_) => "linkage",
            Error::Coverage(_) => "coverage",
            Error::Sampling(_) => "sampling",
            Error::DegenerateData(_) => "degenerate-data",
            Error::Json { .. } => "json",
        }
    }
}
