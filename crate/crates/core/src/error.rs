use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("image is constant; cannot normalize its range")]
    ConstantImage,
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("value outside [0, 1]: {name} = {value}")]
    DomainError { name: &'static str, value: f64 },

    #[error("bad magic: not a Radiance HDR stream")]
    BadMagic,
    #[error("unsupported orientation {0:?}, only \"-Y h +X w\" is accepted")]
    UnsupportedOrientation(String),
    #[error("truncated scanline at row {row}")]
    TruncatedScanline { row: usize },
    #[error("bad RLE run at row {row}: {reason}")]
    BadRleRun { row: usize, reason: String },
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("PPM maxval {0} unsupported, only 255 is accepted")]
    MaxvalUnsupported(u32),
    #[error("PNG bit depth {0} unsupported, only 8-bit is accepted")]
    BitDepthUnsupported(u8),
    #[error("non-finite or negative sample at index {index}")]
    NonFiniteSample { index: usize },
    #[error("unrecognized image format")]
    UnknownFormat,
    #[error("PNG: {0}")]
    Png(String),

    #[error("ManifestInvalid at {location}: {reason}")]
    ManifestInvalid { location: String, reason: String },
    #[error("LengthMismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("TooFewItems: need at least 2, got {0}")]
    TooFewItems(usize),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("set {set_id}: {source}")]
    InSet {
        set_id: i64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Walks through path/set annotations to the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::File { source, .. } | Error::InSet { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_dimension_mismatch(&self) -> bool {
        matches!(self.root(), Error::DimensionMismatch { .. })
    }

    pub(crate) fn mismatch(a: (usize, usize), b: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_width: a.0,
            left_height: a.1,
            right_width: b.0,
            right_height: b.1,
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
