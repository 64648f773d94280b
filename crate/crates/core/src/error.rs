use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed PGM mask data.
    #[error("mask codec: {0}")]
    Codec(String),

    /// A PGM payload byte that does not correspond to any label class.
    #[error("invalid label value {value} at byte offset {offset}")]
    InvalidLabel { value: u8, offset: usize },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    /// The mask holds no iris or pupil pixels to localize.
    #[error("no iris or pupil pixels in mask")]
    EmptyEye,

    #[error("degenerate circle fit: {0}")]
    DegenerateFit(String),

    #[error("no circle found: peak support {peak:.3} below {threshold}")]
    NoCircle { peak: f64, threshold: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("annotation {image_id}: {message}")]
    Annotation { image_id: String, message: String },

    #[error("annotation json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("measurement csv: {0}")]
    Csv(String),

    #[error("series: {0}")]
    Series(String),

    #[error("invalid eye spec: {0}")]
    Spec(String),

    /// An error while processing the named file.
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_file(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(source),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
