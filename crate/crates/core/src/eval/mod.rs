//! Frame-wise and segment-wise scoring of label sequences.

mod frame;
mod report;
mod segment;

use thiserror::Error;

pub use frame::{cohen_kappa, frame_confusion, frame_f1, ConfusionMatrix};
pub use report::{evaluate_meal, mean_std, meal_table, EvalReport, DEFAULT_KS};
pub use segment::{iou, segment_match, segmental_f1, ClassCounts, SegmentOutcome};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("sequence lengths differ: ground truth {gt}, prediction {pred}")]
    LengthMismatch { gt: usize, pred: usize },
    #[error("empty segment [{start}, {end})")]
    EmptySegment { start: u32, end: u32 },
    #[error("segments {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("threshold {0} outside (0, 1)")]
    Threshold(f64),
    #[error("segment of class other")]
    OtherSegment,
}
