//! Eating and drinking gesture segmentation from FMCW radar.
//!
//! The crate is organised along the processing chain:
//!
//! * [`dataset_io`]: `.eatr` cube container, annotation / prediction CSVs,
//!   frame labels, segment extraction and meal-level fold plans.
//! * [`radar_dsp`]: raw beat-signal cube to cropped Range-Doppler cube
//!   (range FFT, mean-chirp removal, Doppler FFT, RX superposition, ROI crop),
//!   Doppler-time maps and model input normalisation.
//! * [`scene_sim`]: point-scatterer meal simulator that produces raw cubes
//!   with exact ground truth.
//! * [`tcn`]: the dilated residual 3D temporal convolutional network, its
//!   loss, training loop and chunked whole-meal inference.
//! * [`eval`]: frame-wise confusion / f1 / Cohen's kappa and IoU-based
//!   segmental F1.
//!
//! Data-parallel loops go through [`exec`]; with the `parallel` feature
//! (default) they run on rayon, otherwise sequentially. Results are identical
//! either way.

pub mod dataset_io;
pub mod eval;
pub mod exec;
pub mod radar_dsp;
pub mod scene_sim;
pub mod tcn;

pub use dataset_io::{Class, LabelSequence, Segment, SegmentSet};
pub use num_complex::Complex32;
