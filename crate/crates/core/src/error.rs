use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty image")]
    EmptyImage,
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("buffer length {got} does not match {width}x{height}")]
    BufferLength { width: usize, height: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("image has a single intensity; no threshold separates it")]
    ConstantImage,
    #[error("region is empty")]
    EmptyRegion,
    #[error("class {class} has {count} samples, need at least {needed}")]
    ClassTooSmall { class: usize, count: usize, needed: usize },
    #[error("no minority class present")]
    NoMinorityClass,
    #[error("training data holds a single class")]
    SingleClass,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("row {row} has length {got}, expected {expected}")]
    RowLength { row: usize, expected: usize, got: usize },
    #[error("class {0} has a zero count")]
    ZeroCount(usize),
    #[error("annotation at ({x}, {y}) lies outside a {width}x{height} image")]
    AnnotationOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
