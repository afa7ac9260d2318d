use std::fmt;

/// Errors raised by the library. Each variant corresponds to one failure class
/// so callers (notably the CLI) can map them to exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid level {0}: levels start at 1")]
    InvalidLevel(usize),

    /// The requested depth needs more mirror padding than the image can provide.
    #[error("level {requested} too large for a {width}x{height} image (max level {max_level})")]
    LevelTooLarge {
        requested: usize,
        max_level: usize,
        width: usize,
        height: usize,
    },

    #[error(
        "mirror margin {margin} exceeds {width}x{height} image (must be <= min dimension - 1)"
    )]
    PadExceedsImage {
        margin: usize,
        width: usize,
        height: usize,
    },

    #[error("inconsistent decomposition: {0}")]
    InconsistentDecomposition(String),

    #[error("insufficient levels: have {levels}, detail sum starts at j_min = {j_min}")]
    InsufficientLevels { levels: usize, j_min: usize },

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("could not place blob {blob} without overlap after {attempts} attempts")]
    PlacementFailed { blob: usize, attempts: usize },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Image decoding failure, with the byte offset where it was detected when known.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    BadMagic,
    MalformedHeader(String),
    TruncatedPayload { expected: usize, found: usize },
    BadSample(String),
    Unsupported(String),
}

impl ParseError {
    pub(crate) fn at(kind: ParseErrorKind, offset: usize) -> Self {
        Self {
            kind,
            offset: Some(offset),
        }
    }

    pub(crate) fn new(kind: ParseErrorKind) -> Self {
        Self { kind, offset: None }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::BadMagic => write!(f, "unrecognized image magic")?,
            ParseErrorKind::MalformedHeader(m) => write!(f, "malformed header: {m}")?,
            ParseErrorKind::TruncatedPayload { expected, found } => write!(
                f,
                "truncated payload: expected {expected} samples, found {found}"
            )?,
            ParseErrorKind::BadSample(m) => write!(f, "bad sample: {m}")?,
            ParseErrorKind::Unsupported(m) => write!(f, "unsupported format: {m}")?,
        }
        if let Some(off) = self.offset {
            write!(f, " (at byte {off})")?;
        }
        Ok(())
    }
}
