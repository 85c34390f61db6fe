use std::path::PathBuf;

use crate::raster::Label;

/// Errors produced anywhere in the assessment pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("decode error: {0}")]
    Decode(String),

    #[error("invalid label value {value} at ({x}, {y}); expected 0..=4")]
    InvalidLabel { value: u8, x: u32, y: u32 },

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("invalid report: {0}")]
    InvalidReport(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("missing structure: no usable {0} region")]
    MissingStructure(Label),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("isotropic pixel distribution; principal axis is undefined")]
    IsotropicAxis,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("duplicate image_id `{0}`")]
    DuplicateKey(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config error for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("degenerate phantom: {0}")]
    PhantomDegenerate(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: (u32, u32), actual: (u32, u32)) -> Self {
        Error::ShapeMismatch {
            expected: format!("{}x{}", expected.0, expected.1),
            actual: format!("{}x{}", actual.0, actual.1),
        }
    }
}
