//! Raw beat-signal cube to cropped Range-Doppler cube.
//!
//! ```text
//! RawCube [F, V, C, S]
//!   -> range_fft      RpCube [F, V, C, R]        R = S
//!   -> remove_static  RpCube, mean chirp removed per frame/antenna
//!   -> doppler_fft    DopplerCube [F, V, D, R]   D = C, zero velocity at D/2
//!   -> rx_superpose   MagnitudeCube [F, D, R]    mean of antenna magnitudes
//!   -> crop_roi       RdCube [F, D1, R1]
//!   -> dt_map         DtMap [F, D1]              range mean
//! ```
//!
//! Every stage is a per-frame map; the whole-cube functions run frames in
//! parallel through [`crate::exec`] and [`process_frame`] chains the same
//! per-frame kernels, so staged and fused processing agree bit for bit.

mod chain;
mod config;
mod normalize;
mod render;

pub use chain::{
    crop_roi, doppler_fft, dt_map, process_frame, process_frames, process_meal, range_fft,
    remove_static, rx_superpose, DspPlan,
};
pub use config::RadarConfig;
pub use normalize::normalize_for_model;
pub use render::{read_csv_matrix, render_csv, render_pgm, Image};

use num_complex::Complex32;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DspError {
    #[error("invalid radar config: {0}")]
    InvalidConfig(String),
    #[error("buffer holds {actual} values, shape {shape:?} needs {expected}")]
    ShapeMismatch {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("crop {crop_doppler}x{crop_range} exceeds frame {n_doppler}x{n_range}")]
    CropTooLarge {
        crop_doppler: usize,
        crop_range: usize,
        n_doppler: usize,
        n_range: usize,
    },
    #[error("frame {index} out of range for {n_frames} frames")]
    FrameOutOfRange { index: usize, n_frames: usize },
}

fn check_len(shape: &[usize], actual: usize) -> Result<(), DspError> {
    let expected = shape.iter().product();
    if expected != actual {
        return Err(DspError::ShapeMismatch {
            shape: shape.to_vec(),
            expected,
            actual,
        });
    }
    Ok(())
}

/// Complex beat samples, `[frames, antennas, chirps, samples]`, samples fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCube {
    pub config: RadarConfig,
    pub data: Vec<Complex32>,
}

impl RawCube {
    pub fn new(config: RadarConfig, data: Vec<Complex32>) -> Result<Self, DspError> {
        config.validate()?;
        check_len(&config.raw_shape(), data.len())?;
        Ok(RawCube { config, data })
    }

    pub fn zeros(config: RadarConfig) -> Self {
        let n = config.raw_shape().iter().product();
        RawCube {
            config,
            data: vec![Complex32::new(0.0, 0.0); n],
        }
    }

    pub fn n_frames(&self) -> usize {
        self.config.n_frames
    }

    pub fn frame(&self, t: usize) -> &[Complex32] {
        let len = self.config.raw_frame_len();
        &self.data[t * len..(t + 1) * len]
    }
}

/// Range profiles, `[frames, antennas, chirps, range bins]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RpCube {
    pub config: RadarConfig,
    pub data: Vec<Complex32>,
}

/// Range-Doppler spectra per antenna, `[frames, antennas, doppler, range]`,
/// Doppler axis centre-shifted.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerCube {
    pub config: RadarConfig,
    pub data: Vec<Complex32>,
}

/// Real-valued `[frames, doppler, range]` cube. Used both for the full
/// RX-superposed frames and for the cropped network input.
#[derive(Debug, Clone, PartialEq)]
pub struct RdCube {
    pub n_frames: usize,
    pub n_doppler: usize,
    pub n_range: usize,
    pub fps: f32,
    pub data: Vec<f32>,
}

/// Full-size RX-superposed magnitudes before cropping.
pub type MagnitudeCube = RdCube;

impl RdCube {
    pub fn new(n_frames: usize, n_doppler: usize, n_range: usize, fps: f32, data: Vec<f32>) -> Result<Self, DspError> {
        check_len(&[n_frames, n_doppler, n_range], data.len())?;
        Ok(RdCube {
            n_frames,
            n_doppler,
            n_range,
            fps,
            data,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.n_doppler * self.n_range
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        let len = self.frame_len();
        &self.data[t * len..(t + 1) * len]
    }

    pub fn at(&self, t: usize, doppler: usize, range: usize) -> f32 {
        self.data[(t * self.n_doppler + doppler) * self.n_range + range]
    }

    /// `(doppler, range)` of the largest value in frame `t`; first wins on ties.
    pub fn argmax(&self, t: usize) -> (usize, usize) {
        let frame = self.frame(t);
        let mut best = 0;
        for (i, &v) in frame.iter().enumerate() {
            if v > frame[best] {
                best = i;
            }
        }
        (best / self.n_range, best % self.n_range)
    }

    /// Copy of frames `[start, end)`.
    pub fn slice_frames(&self, start: usize, end: usize) -> RdCube {
        let len = self.frame_len();
        RdCube {
            n_frames: end - start,
            n_doppler: self.n_doppler,
            n_range: self.n_range,
            fps: self.fps,
            data: self.data[start * len..end * len].to_vec(),
        }
    }
}

/// Doppler-time map, `[frames, doppler]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DtMap {
    pub n_frames: usize,
    pub n_doppler: usize,
    pub fps: f32,
    pub data: Vec<f32>,
}
