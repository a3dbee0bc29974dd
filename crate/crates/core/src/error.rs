use std::path::PathBuf;

use mcgan_nn::NnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum McganError {
    #[error("empty glyph: no foreground pixel")]
    EmptyGlyph,

    #[error("observation set is empty")]
    EmptyObservationSet,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("non-finite loss term `{term}` at step {step}")]
    Diverged { term: String, step: u64 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("missing files referenced by {manifest}: {}", .missing.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingFiles {
        manifest: PathBuf,
        missing: Vec<PathBuf>,
    },

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("font `{font_id}`: {source}")]
    Font {
        font_id: String,
        #[source]
        source: Box<McganError>,
    },

    #[error("image {path}: {msg}")]
    Image { path: PathBuf, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Nn(#[from] NnError),
}

impl McganError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> McganError {
        let path = path.into();
        move |source| McganError::Io { path, source }
    }

    /// Short stable tag used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            McganError::EmptyGlyph => "empty_glyph",
            McganError::EmptyObservationSet => "empty_observation_set",
            McganError::InvalidInput(_) => "invalid_input",
            McganError::ShapeMismatch { .. } => "shape_mismatch",
            McganError::Diverged { .. } => "diverged",
            McganError::Parse { .. } => "parse",
            McganError::MissingFiles { .. } => "missing_files",
            McganError::Config(_) => "config",
            McganError::Font { .. } => "font",
            McganError::Image { .. } => "image",
            McganError::Io { .. } => "io",
            McganError::Nn(_) => "network",
        }
    }
}

pub type Result<T> = std::result::Result<T, McganError>;
