use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataset_io::Class;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureKind {
    EatingForkKnife,
    EatingChopsticks,
    EatingSpoon,
    EatingHand,
    Drinking,
}

impl GestureKind {
    pub const EATING: [GestureKind; 4] = [
        GestureKind::EatingForkKnife,
        GestureKind::EatingChopsticks,
        GestureKind::EatingSpoon,
        GestureKind::EatingHand,
    ];

    pub fn class(self) -> Class {
        match self {
            GestureKind::Drinking => Class::Drinking,
            _ => Class::Eating,
        }
    }
}

/// Hand-to-mouth movement: raise from `d_start` to `d_mouth`, hold, return.
///
/// Ranges are radar-to-hand distances. With the radar placed beyond the plate
/// the mouth is farther away than the plate, so raising the hand recedes
/// (negative Doppler) and returning approaches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureTemplate {
    pub kind: GestureKind,
    pub d_start: f64,
    pub d_mouth: f64,
    pub raise_time: f64,
    pub dwell_time: f64,
    pub return_time: f64,
}

impl GestureTemplate {
    /// Nominal template of a gesture kind, before duration scaling.
    pub fn nominal(kind: GestureKind) -> Self {
        let (d_start, d_mouth, raise, dwell, ret) = match kind {
            GestureKind::EatingForkKnife => (0.36, 0.70, 0.8, 0.6, 0.8),
            GestureKind::EatingChopsticks => (0.34, 0.68, 0.7, 0.5, 0.7),
            GestureKind::EatingSpoon => (0.36, 0.68, 0.8, 0.4, 0.8),
            GestureKind::EatingHand => (0.38, 0.70, 0.7, 0.7, 0.7),
            GestureKind::Drinking => (0.30, 0.74, 1.2, 2.6, 1.2),
        };
        GestureTemplate {
            kind,
            d_start,
            d_mouth,
            raise_time: raise,
            dwell_time: dwell,
            return_time: ret,
        }
    }

    pub fn duration(&self) -> f64 {
        self.raise_time + self.dwell_time + self.return_time
    }

    pub fn reach(&self) -> f64 {
        self.d_mouth - self.d_start
    }

    /// Largest |radial velocity| over the movement (raised-cosine peak).
    pub fn peak_speed(&self) -> f64 {
        let r = self.reach().abs() * PI / 2.0;
        (r / self.raise_time).max(r / self.return_time)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.d_start > 0.0 && self.d_mouth > 0.0) {
            return Err(format!("ranges must be positive: {} / {}", self.d_start, self.d_mouth));
        }
        if self.d_start == self.d_mouth {
            return Err("d_start and d_mouth coincide".into());
        }
        if !(self.raise_time > 0.0 && self.dwell_time > 0.0 && self.return_time > 0.0) {
            return Err("phase durations must be positive".into());
        }
        Ok(())
    }
}

/// Range and radial velocity of the hand over one gesture, as a function of
/// time since gesture start. Velocity is positive when approaching the radar,
/// i.e. `v = -dd/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureTrajectory {
    pub template: GestureTemplate,
}

pub fn gesture_trajectory(template: &GestureTemplate) -> GestureTrajectory {
    GestureTrajectory { template: *template }
}

impl GestureTrajectory {
    /// `(range m, velocity m/s)` at `tau` seconds after the gesture starts.
    /// Before and after the gesture the hand rests at `d_start`.
    pub fn state(&self, tau: f64) -> (f64, f64) {
        let g = &self.template;
        let reach = g.reach();
        let t_dwell = g.raise_time;
        let t_return = g.raise_time + g.dwell_time;
        let t_end = t_return + g.return_time;
        if tau <= 0.0 || tau >= t_end {
            (g.d_start, 0.0)
        } else if tau < t_dwell {
            let x = PI * tau / g.raise_time;
            let d = g.d_start + reach * (1.0 - x.cos()) / 2.0;
            let dd = reach * PI / (2.0 * g.raise_time) * x.sin();
            (d, -dd)
        } else if tau <= t_return {
            (g.d_mouth, 0.0)
        } else {
            let x = PI * (tau - t_return) / g.return_time;
            let d = g.d_mouth - reach * (1.0 - x.cos()) / 2.0;
            let dd = -reach * PI / (2.0 * g.return_time) * x.sin();
            (d, -dd)
        }
    }

    pub fn duration(&self) -> f64 {
        self.template.duration()
    }
}
