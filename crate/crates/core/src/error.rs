use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("no valid pixels to compare")]
    NoValidPixels,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("disparity range exceeds frame width (shift {shift} px, width {width} px)")]
    DisparityExceedsWidth { shift: usize, width: usize },

    #[error("nothing to propagate: every pixel is masked")]
    NothingToPropagate,

    #[error("chunk of {frames} frames exceeds backend capacity {capacity}")]
    CapacityExceeded { frames: usize, capacity: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error("transport error: {0}")]
    Transport(#[source] std::io::Error),

    #[error("chunk {index}: {source}")]
    Chunk {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("tile {index}: {source}")]
    Tile {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("{} already exists", .0.display())]
    AlreadyExists(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Strips chunk/tile wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Chunk { source, .. } | Error::Tile { source, .. } => source.root_cause(),
            other => other,
        }
    }
}
