//! File formats and label bookkeeping.
//!
//! * `.eatr` cubes: a fixed 32-byte little-endian header followed by the raw
//!   payload, last dimension fastest.
//! * Annotation CSV `start_s,end_s,label` with labels `eating` / `drinking`;
//!   everything not covered is the implicit `other` class.
//! * Prediction CSV `frame,label_id`.
//! * Fold plans as JSON.

mod annotations;
mod cube;
mod folds;
mod labels;
mod predictions;

pub use annotations::{read_annotations, write_annotations, Interval, IntervalTrack};
pub use cube::{
    read_cube, write_cube, CubeHeader, CubeKind, CubeReader, CubeWriter, Payload, ScalarType,
    CUBE_VERSION, HEADER_LEN, MAGIC,
};
pub use folds::{make_folds, read_fold_plan, write_fold_plan, Fold, FoldPlan};
pub use labels::{
    frame_labels_to_segments, intervals_to_frame_labels, Class, LabelSequence, Segment, SegmentSet,
};
pub use predictions::{read_predictions, write_predictions};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic {0:?}, expected \"EATR\"")]
    BadMagic([u8; 4]),
    #[error("unsupported cube version {0}")]
    UnsupportedVersion(u16),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("payload has {actual} elements but dims {dims:?} need {expected}")]
    PayloadMismatch {
        dims: Vec<u32>,
        expected: usize,
        actual: usize,
    },
    #[error("scalar type {scalar:?} is not allowed for cube kind {kind:?}")]
    KindScalarMismatch { kind: CubeKind, scalar: ScalarType },
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error("interval {index} overlaps its predecessor")]
    Overlap { index: usize },
    #[error("interval {index}: start {start} is not before end {end}")]
    EmptyInterval { index: usize, start: f64, end: f64 },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("{0} meals cannot be split into {1} equal folds")]
    Indivisible(usize, u32),
    #[error("invalid fold plan: {0}")]
    InvalidFolds(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl FormatError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.into(),
            source,
        }
    }
}
