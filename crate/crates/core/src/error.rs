use thiserror::Error;

use crate::safety::SearchTrace;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the model (bad angle, negative length, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("missing glyph assets for digits {0:?}")]
    MissingGlyphs(Vec<u8>),

    #[error("rectangle {rect:?} exceeds image bounds {width}x{height}")]
    OutOfBounds {
        rect: (usize, usize, usize, usize),
        width: usize,
        height: usize,
    },

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("device {0} has no camera profile")]
    NoCamera(String),

    /// The visibility index never reached the threshold inside the search bracket.
    #[error("visibility index stays below {v_th} up to {upper} in")]
    Unbounded {
        v_th: f64,
        upper: f64,
        trace: SearchTrace,
    },

    /// The visibility index was not monotone on the scanned bracket.
    #[error("visibility index is not monotone near r = {at} in")]
    NonMonotone { at: f64, trace: SearchTrace },

    #[error("target unreachable: sigma_hf bracket [{lo}, {hi}] c/im does not contain a solution")]
    SigmaUnreachable { lo: f64, hi: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors raised by the safety-distance searches.
    pub fn is_search_failure(&self) -> bool {
        matches!(
            self,
            Error::Unbounded { .. } | Error::NonMonotone { .. } | Error::SigmaUnreachable { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
