use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate ({row}, {col}) outside {rows}x{cols} grid")]
    OutOfBounds {
        row: i64,
        col: i64,
        rows: usize,
        cols: usize,
    },

    #[error("invalid spiral address digit {0} (expected 0..=6)")]
    InvalidAddress(u8),

    #[error("unsupported kernel radius {0}")]
    UnsupportedRadius(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("label {label} outside [0, {class_count})")]
    Label { label: usize, class_count: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
