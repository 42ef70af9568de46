//! Synthetic FMCW meal sessions.
//!
//! A meal is a [`MealScript`]: gesture start times with kinematic templates
//! plus background (torso, static clutter, unlabelled fidgets, noise). The
//! [`Synthesizer`] renders it into a raw beat-signal cube in bin-normalised
//! form, so a scatterer at `(d, v)` lands exactly on range bin `d / dr` and
//! centred Doppler bin `v / dv`. The scripted intervals are the ground truth.

mod gesture;
mod script;
mod synth;

pub use gesture::{gesture_trajectory, GestureKind, GestureTemplate, GestureTrajectory};
pub use script::{
    class_time_shares, sample_meal_script, scale_template, Background, DurationStats, Fidget, MealScript,
    ScriptedGesture, StaticClutter, StatsProfile,
};
pub use synth::{meal_synthesizer, synth_raw_cube, synth_rd_cube, Motion, Scatterer, Scene, SynthOptions, Synthesizer};

use crate::radar_dsp::DspError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("invalid meal script: {0}")]
    InvalidScript(String),
    #[error(
        "scatterer {scatterer} at frame {frame} (range {range:.3} m, velocity {velocity:.3} m/s) \
         is outside the unambiguous range/velocity"
    )]
    Aliasing {
        scatterer: usize,
        frame: usize,
        range: f64,
        velocity: f64,
    },
    #[error(transparent)]
    Dsp(#[from] DspError),
}
