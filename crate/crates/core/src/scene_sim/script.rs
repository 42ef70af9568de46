use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use super::{GestureKind, GestureTemplate, SimError};
use crate::dataset_io::{Class, Interval, IntervalTrack};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptedGesture {
    pub start: f64,
    pub template: GestureTemplate,
}

impl ScriptedGesture {
    pub fn end(&self) -> f64 {
        self.start + self.template.duration()
    }
}

/// Unlabelled hand activity near the plate (cutting, stirring, reaching).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fidget {
    pub start: f64,
    pub duration: f64,
    /// peak range excursion, metres
    pub amplitude: f64,
    /// oscillation frequency, Hz; 0 means a single out-and-back reach
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticClutter {
    pub range: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    /// resting hand range when no gesture is running
    pub plate_range: f64,
    pub hand_amplitude: f64,
    /// extra reflector carried with the hand while drinking
    pub cup_amplitude: f64,
    pub cup_offset: f64,
    pub torso_range: f64,
    pub torso_amplitude: f64,
    pub sway_amplitude: f64,
    pub sway_period: f64,
    /// how far the torso leans towards the radar while the hand is raised
    pub torso_lean: f64,
    pub clutter: Vec<StaticClutter>,
    pub fidgets: Vec<Fidget>,
    /// noise power relative to the strongest scatterer; `None` = noiseless
    pub noise_snr_db: Option<f64>,
}

impl Default for Background {
    fn default() -> Self {
        Background {
            plate_range: 0.36,
            hand_amplitude: 1.0,
            cup_amplitude: 0.8,
            cup_offset: 0.05,
            torso_range: 0.92,
            torso_amplitude: 0.6,
            sway_amplitude: 0.01,
            sway_period: 4.0,
            torso_lean: 0.03,
            clutter: vec![
                StaticClutter { range: 0.16, amplitude: 2.0 },
                StaticClutter { range: 1.10, amplitude: 1.5 },
            ],
            fidgets: Vec::new(),
            noise_snr_db: Some(15.0),
        }
    }
}

impl Background {
    /// No torso, clutter, fidgets or noise: only the hand.
    pub fn quiet() -> Self {
        Background {
            torso_amplitude: 0.0,
            sway_amplitude: 0.0,
            torso_lean: 0.0,
            clutter: Vec::new(),
            noise_snr_db: None,
            ..Background::default()
        }
    }
}

/// Everything the simulator needs to render one meal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MealScript {
    pub duration: f64,
    pub gestures: Vec<ScriptedGesture>,
    pub background: Background,
}

impl MealScript {
    pub fn n_frames(&self, fps: f32) -> usize {
        (self.duration * fps as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScript(m));
        if !(self.duration > 0.0) {
            return bad(format!("duration {} must be positive", self.duration));
        }
        for (i, g) in self.gestures.iter().enumerate() {
            g.template
                .validate()
                .map_err(|m| SimError::InvalidScript(format!("gesture {i}: {m}")))?;
            if g.start < 0.0 || g.end() > self.duration {
                return bad(format!(
                    "gesture {i} [{:.3}, {:.3}) lies outside the {:.3} s meal",
                    g.start,
                    g.end(),
                    self.duration
                ));
            }
            if i > 0 && g.start < self.gestures[i - 1].end() {
                return bad(format!("gesture {i} overlaps gesture {}", i - 1));
            }
        }
        Ok(())
    }

    /// Scripted gesture intervals as annotations.
    pub fn annotations(&self) -> IntervalTrack {
        IntervalTrack {
            entries: self
                .gestures
                .iter()
                .map(|g| Interval::new(g.start, g.end(), g.template.kind.class()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl DurationStats {
    /// Log-normal with the given mean and standard deviation, clamped to `[min, max]`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let sigma2 = (1.0 + (self.std / self.mean).powi(2)).ln();
        let mu = self.mean.ln() - sigma2 / 2.0;
        let dist = LogNormal::new(mu, sigma2.sqrt()).expect("positive moments");
        dist.sample(rng).clamp(self.min, self.max)
    }
}

/// Statistics a synthetic meal is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsProfile {
    pub name: String,
    pub duration: f64,
    pub eating: DurationStats,
    pub drinking: DurationStats,
    /// time shares other : eating : drinking
    pub time_ratio: [f64; 3],
    pub min_gap: f64,
    /// chance that a gap contains a fidget
    pub fidget_rate: f64,
    /// cap on hand speed when scaling templates to a sampled duration
    pub max_hand_speed: f64,
    pub background: Background,
}

impl StatsProfile {
    /// Meal statistics from the recorded dataset: eating 2.76 ± 1.32 s
    /// (1.04–17.08 s), drinking 5.22 ± 2.14 s (2.36–20.60 s), time shares
    /// 11.09 : 2.71 : 1.
    pub fn default_profile() -> Self {
        StatsProfile {
            name: "default".into(),
            duration: 120.0,
            eating: DurationStats {
                mean: 2.76,
                std: 1.32,
                min: 1.04,
                max: 17.08,
            },
            drinking: DurationStats {
                mean: 5.22,
                std: 2.14,
                min: 2.36,
                max: 20.60,
            },
            time_ratio: [11.09, 2.71, 1.0],
            min_gap: 1.0,
            fidget_rate: 0.5,
            max_hand_speed: 1.0,
            background: Background::default(),
        }
    }

    /// Same statistics, hand only, no noise.
    pub fn clean_profile() -> Self {
        StatsProfile {
            name: "clean".into(),
            fidget_rate: 0.0,
            background: Background::quiet(),
            ..Self::default_profile()
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default_profile()),
            "clean" => Some(Self::clean_profile()),
            _ => None,
        }
    }

    pub fn with_duration(self, duration: f64) -> Self {
        StatsProfile { duration, ..self }
    }

    /// Probability that a gesture is a drink, chosen so that expected time
    /// shares follow `time_ratio`.
    pub fn drinking_probability(&self) -> f64 {
        let e = self.time_ratio[1] / self.eating.mean;
        let d = self.time_ratio[2] / self.drinking.mean;
        d / (e + d)
    }

    /// Mean background time between gestures.
    pub fn mean_gap(&self) -> f64 {
        let p = self.drinking_probability();
        let mean_gesture = (1.0 - p) * self.eating.mean + p * self.drinking.mean;
        let [other, eat, drink] = self.time_ratio;
        other / (eat + drink) * mean_gesture
    }
}

/// Splits a sampled duration over the phases of the kind's nominal template
/// and shortens the reach if the hand would exceed `max_speed`.
pub fn scale_template(kind: GestureKind, duration: f64, max_speed: f64) -> GestureTemplate {
    let nominal = GestureTemplate::nominal(kind);
    let k = duration / nominal.duration();
    let mut g = GestureTemplate {
        raise_time: nominal.raise_time * k,
        dwell_time: nominal.dwell_time * k,
        return_time: nominal.return_time * k,
        ..nominal
    };
    let fastest = g.raise_time.min(g.return_time);
    let max_reach = max_speed * 2.0 * fastest / std::f64::consts::PI;
    if g.reach().abs() > max_reach {
        g.d_mouth = g.d_start + max_reach * g.reach().signum();
    }
    g
}

/// Draws a meal: alternating background gaps and gestures until the meal is full.
pub fn sample_meal_script(profile: &StatsProfile, seed: u64) -> MealScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_drink = profile.drinking_probability();
    let gap_extra = Exp::new(1.0 / (profile.mean_gap() - profile.min_gap).max(1e-3)).unwrap();
    let mut background = profile.background.clone();
    background.fidgets.clear();
    let mut gestures = Vec::new();
    let mut t = 0.0;
    loop {
        let gap = profile.min_gap + gap_extra.sample(&mut rng);
        let kind = if rng.gen_bool(p_drink) {
            GestureKind::Drinking
        } else {
            GestureKind::EATING[rng.gen_range(0..GestureKind::EATING.len())]
        };
        let stats = if kind == GestureKind::Drinking { &profile.drinking } else { &profile.eating };
        let duration = stats.sample(&mut rng);
        if rng.gen_bool(profile.fidget_rate) && gap > 2.5 {
            let len = rng.gen_range(1.0..(gap - 1.0).min(3.0));
            let start = t + rng.gen_range(0.5..gap - len - 0.25);
            let oscillating = rng.gen_bool(0.6);
            background.fidgets.push(Fidget {
                start,
                duration: len,
                amplitude: if oscillating { rng.gen_range(0.01..0.025) } else { rng.gen_range(0.05..0.12) },
                frequency: if oscillating { rng.gen_range(1.5..3.0) } else { 0.0 },
            });
        }
        let start = t + gap;
        if start + duration > profile.duration - profile.min_gap {
            break;
        }
        let mut template = scale_template(kind, duration, profile.max_hand_speed);
        let reach = template.reach();
        template.d_start = background.plate_range;
        template.d_mouth = background.plate_range + reach;
        gestures.push(ScriptedGesture { start, template });
        t = start + duration;
    }
    // a fidget drawn for the last (rejected) gap may run past the meal end
    background.fidgets.retain(|f| f.start + f.duration <= profile.duration);
    MealScript {
        duration: profile.duration,
        gestures,
        background,
    }
}

/// Fraction of meal time per class, `[other, eating, drinking]`.
pub fn class_time_shares(script: &MealScript) -> [f64; 3] {
    let mut shares = [0.0; 3];
    for g in &script.gestures {
        shares[g.template.kind.class().index()] += g.template.duration();
    }
    shares[Class::Other.index()] = script.duration - shares[1] - shares[2];
    shares.map(|s| s / script.duration)
}
