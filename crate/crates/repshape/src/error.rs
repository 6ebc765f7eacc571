//! Error type shared by all modules.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, ShapeError>;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("rank-{rank} array: representation matrices need at least 2 axes")]
    RankTooLow { rank: usize },

    #[error("degenerate shape: zero Frobenius norm after centering")]
    DegenerateShape,

    #[error("degenerate direction: {0} is in the same shape class as the reference")]
    DegenerateDirection(String),

    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}{context}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
        context: String,
    },

    #[error("duplicate id \"{0}\" in manifest")]
    DuplicateId(String),

    #[error("manifest entry \"{id}\": path {path} not resolvable")]
    UnresolvablePath { id: String, path: PathBuf },

    #[error("landmark count mismatch: \"{id_a}\" has M={m_a} but \"{id_b}\" has M={m_b}")]
    LandmarkCountMismatch {
        id_a: String,
        m_a: usize,
        id_b: String,
        m_b: usize,
    },

    #[error("manifest has no entry with id \"{0}\"")]
    MissingEntry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is indefinite beyond tolerance: {0}")]
    Indefinite(String),

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("empty ensemble side")]
    EmptyEnsemble,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("entry \"{id}\": {source}")]
    WithEntry {
        id: String,
        #[source]
        source: Box<ShapeError>,
    },
}

impl ShapeError {
    /// True for errors caused by malformed or inconsistent inputs, as opposed
    /// to failures arising during numerical computation on valid inputs.
    pub fn is_input_error(&self) -> bool {
        match self {
            ShapeError::WithEntry { source, .. } => source.is_input_error(),
            ShapeError::DegenerateShape
            | ShapeError::DegenerateDirection(_)
            | ShapeError::Indefinite(_)
            | ShapeError::ZeroVariance(_)
            | ShapeError::Numerical(_) => false,
            _ => true,
        }
    }

    /// Attaches the manifest id the failure belongs to.
    pub fn for_entry(self, id: &str) -> Self {
        ShapeError::WithEntry {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
