use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{gesture_trajectory, Fidget, MealScript, ScriptedGesture, SimError};
use crate::dataset_io::{Class, IntervalTrack};
use crate::exec;
use crate::radar_dsp::{process_frames, DspPlan, RadarConfig, RawCube, RdCube};

/// How a point scatterer moves. Velocities are radial, positive towards the radar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Motion {
    /// Constant range and velocity; the pair is free (not integrated), which
    /// keeps a target parked on one range-Doppler bin.
    Fixed { range: f64, velocity: f64 },
    /// Resting at `rest`, driven by the scripted gestures and fidgets.
    Hand {
        rest: f64,
        gestures: Vec<ScriptedGesture>,
        fidgets: Vec<Fidget>,
    },
    /// Moves with the hand during drinking gestures, offset in range, else static.
    Cup {
        rest: f64,
        offset: f64,
        gestures: Vec<ScriptedGesture>,
    },
    /// Slow sway plus a small lean that follows the hand lift.
    Torso {
        range: f64,
        sway_amplitude: f64,
        sway_period: f64,
        lean: f64,
        gestures: Vec<ScriptedGesture>,
    },
}

fn active_gesture(gestures: &[ScriptedGesture], t: f64) -> Option<&ScriptedGesture> {
    let i = gestures.partition_point(|g| g.start <= t);
    let g = gestures.get(i.checked_sub(1)?)?;
    (t < g.end()).then_some(g)
}

fn fidget_state(rest: f64, f: &Fidget, tau: f64) -> (f64, f64) {
    let len = f.duration;
    if f.frequency > 0.0 {
        // windowed oscillation about the rest position
        let w = (PI * tau / len).sin().powi(2);
        let dw = PI / len * (2.0 * PI * tau / len).sin();
        let ph = 2.0 * PI * f.frequency * tau;
        let d = rest + f.amplitude * ph.sin() * w;
        let dd = f.amplitude * (2.0 * PI * f.frequency * ph.cos() * w + ph.sin() * dw);
        (d, -dd)
    } else {
        // reach towards the radar and back
        let x = 2.0 * PI * tau / len;
        let d = rest - f.amplitude * (1.0 - x.cos()) / 2.0;
        let dd = -f.amplitude * PI / len * x.sin();
        (d, -dd)
    }
}

impl Motion {
    /// `(range m, velocity m/s)` at time `t` seconds.
    pub fn state(&self, t: f64) -> (f64, f64) {
        match self {
            Motion::Fixed { range, velocity } => (*range, *velocity),
            Motion::Hand { rest, gestures, fidgets } => {
                if let Some(g) = active_gesture(gestures, t) {
                    return gesture_trajectory(&g.template).state(t - g.start);
                }
                fidgets
                    .iter()
                    .find(|f| t >= f.start && t < f.start + f.duration)
                    .map(|f| fidget_state(*rest, f, t - f.start))
                    .unwrap_or((*rest, 0.0))
            }
            Motion::Cup { rest, offset, gestures } => match active_gesture(gestures, t) {
                Some(g) if g.template.kind.class() == Class::Drinking => {
                    let (d, v) = gesture_trajectory(&g.template).state(t - g.start);
                    (d + offset, v)
                }
                _ => (rest + offset, 0.0),
            },
            Motion::Torso {
                range,
                sway_amplitude,
                sway_period,
                lean,
                gestures,
            } => {
                let w = 2.0 * PI / sway_period;
                let mut d = range + sway_amplitude * (w * t).sin();
                let mut v = -sway_amplitude * w * (w * t).cos();
                if let Some(g) = active_gesture(gestures, t) {
                    let (hd, hv) = gesture_trajectory(&g.template).state(t - g.start);
                    let reach = g.template.reach();
                    let lift = (hd - g.template.d_start) / reach;
                    d -= lean * lift;
                    v -= lean * hv / reach;
                }
                (d, v)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub amplitude: f32,
    pub phase0: f64,
    pub motion: Motion,
}

impl Scatterer {
    pub fn fixed(amplitude: f32, range: f64, velocity: f64) -> Self {
        Scatterer {
            amplitude,
            phase0: 0.0,
            motion: Motion::Fixed { range, velocity },
        }
    }
}

/// A set of scatterers plus receiver noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
    pub noise_snr_db: Option<f64>,
}

impl Scene {
    pub fn from_script(script: &MealScript) -> Scene {
        let bg = &script.background;
        let mut scatterers = vec![Scatterer {
            amplitude: bg.hand_amplitude as f32,
            phase0: 0.3,
            motion: Motion::Hand {
                rest: bg.plate_range,
                gestures: script.gestures.clone(),
                fidgets: bg.fidgets.clone(),
            },
        }];
        if bg.cup_amplitude > 0.0 {
            scatterers.push(Scatterer {
                amplitude: bg.cup_amplitude as f32,
                phase0: 1.7,
                motion: Motion::Cup {
                    rest: bg.plate_range,
                    offset: bg.cup_offset,
                    gestures: script.gestures.clone(),
                },
            });
        }
        if bg.torso_amplitude > 0.0 {
            scatterers.push(Scatterer {
                amplitude: bg.torso_amplitude as f32,
                phase0: 2.9,
                motion: Motion::Torso {
                    range: bg.torso_range,
                    sway_amplitude: bg.sway_amplitude,
                    sway_period: bg.sway_period,
                    lean: bg.torso_lean,
                    gestures: script.gestures.clone(),
                },
            });
        }
        for (i, c) in bg.clutter.iter().enumerate() {
            scatterers.push(Scatterer {
                amplitude: c.amplitude as f32,
                phase0: 0.7 * (i + 1) as f64,
                motion: Motion::Fixed {
                    range: c.range,
                    velocity: 0.0,
                },
            });
        }
        Scene {
            scatterers,
            noise_snr_db: bg.noise_snr_db,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    /// Permit scatterers beyond the unambiguous range / velocity; they alias.
    pub allow_aliasing: bool,
}

/// Frame-by-frame beat-signal generator.
///
/// Frame `t` is rendered at its centre time `(t + 0.5) / fps`, with range and
/// velocity held constant across its chirps. Sample `n` of chirp `i` is
///
/// ```text
/// sum_k A_k exp(j 2pi (d_k / (dr Ns)) n + j 2pi (v_k / (dv Nc)) i + j phi_k) + noise
/// ```
///
/// identical on every antenna except for the noise, which is complex white
/// Gaussian, independent per antenna, with power set relative to the strongest
/// scatterer. Noise for frame `t` comes from its own ChaCha stream, so any
/// subset of frames can be rendered in any order with identical results.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    config: RadarConfig,
    amplitudes: Vec<Complex64>,
    /// per frame, per scatterer `(range, velocity)`
    states: Vec<(f64, f64)>,
    noise_std: f32,
    seed: u64,
}

impl Synthesizer {
    pub fn new(scene: &Scene, config: &RadarConfig, seed: u64, options: SynthOptions) -> Result<Self, SimError> {
        config.validate()?;
        let n_sc = scene.scatterers.len();
        let max_range = config.n_samples as f64 * config.range_resolution as f64;
        let max_speed = (config.n_chirps / 2) as f64 * config.velocity_resolution as f64;
        let mut states = Vec::with_capacity(config.n_frames * n_sc);
        for t in 0..config.n_frames {
            let time = (t as f64 + 0.5) / config.fps as f64;
            for (k, s) in scene.scatterers.iter().enumerate() {
                let (d, v) = s.motion.state(time);
                let aliased = !(0.0..max_range).contains(&d) || !(-max_speed..max_speed).contains(&v);
                if aliased && !options.allow_aliasing {
                    return Err(SimError::Aliasing {
                        scatterer: k,
                        frame: t,
                        range: d,
                        velocity: v,
                    });
                }
                states.push((d, v));
            }
        }
        let amplitudes = scene
            .scatterers
            .iter()
            .map(|s| Complex64::from_polar(s.amplitude as f64, s.phase0))
            .collect();
        let strongest = scene.scatterers.iter().map(|s| s.amplitude.abs()).fold(0f32, f32::max);
        let noise_std = match scene.noise_snr_db {
            // per real component: total complex power / 2
            Some(db) => {
                let power = (strongest as f64).powi(2) / 10f64.powf(db / 10.0);
                let reference = if strongest > 0.0 { power } else { 10f64.powf(-db / 10.0) };
                (reference / 2.0).sqrt() as f32
            }
            None => 0.0,
        };
        Ok(Synthesizer {
            config: *config,
            amplitudes,
            states,
            noise_std,
            seed,
        })
    }

    pub fn config(&self) -> &RadarConfig {
        &self.config
    }

    pub fn n_frames(&self) -> usize {
        self.config.n_frames
    }

    pub fn noise_std(&self) -> f32 {
        self.noise_std
    }

    /// `(range, velocity)` of scatterer `k` in frame `t`.
    pub fn state(&self, t: usize, k: usize) -> (f64, f64) {
        self.states[t * self.amplitudes.len() + k]
    }

    /// Renders frame `t` into `out` (`[antennas, chirps, samples]`).
    pub fn synth_frame(&self, t: usize, out: &mut [Complex32]) {
        let cfg = &self.config;
        let (nv, nc, ns) = (cfg.n_virtual_antennas, cfg.n_chirps, cfg.n_samples);
        assert_eq!(out.len(), nv * nc * ns);
        let n_sc = self.amplitudes.len();
        let mut clean = vec![Complex64::new(0.0, 0.0); nc * ns];
        let mut range_ph = vec![Complex64::new(0.0, 0.0); ns];
        for k in 0..n_sc {
            let a = self.amplitudes[k];
            if a.norm() == 0.0 {
                continue;
            }
            let (d, v) = self.states[t * n_sc + k];
            let fr = d / (cfg.range_resolution as f64 * ns as f64);
            let fv = v / (cfg.velocity_resolution as f64 * nc as f64);
            for (n, p) in range_ph.iter_mut().enumerate() {
                *p = Complex64::from_polar(1.0, 2.0 * PI * fr * n as f64);
            }
            for (i, row) in clean.chunks_exact_mut(ns).enumerate() {
                let c = a * Complex64::from_polar(1.0, 2.0 * PI * fv * i as f64);
                for (x, p) in row.iter_mut().zip(&range_ph) {
                    *x += c * p;
                }
            }
        }
        if self.noise_std > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(t as u64);
            for block in out.chunks_exact_mut(nc * ns) {
                for (o, x) in block.iter_mut().zip(&clean) {
                    let re: f32 = StandardNormal.sample(&mut rng);
                    let im: f32 = StandardNormal.sample(&mut rng);
                    *o = Complex32::new(x.re as f32 + self.noise_std * re, x.im as f32 + self.noise_std * im);
                }
            }
        } else {
            for block in out.chunks_exact_mut(nc * ns) {
                for (o, x) in block.iter_mut().zip(&clean) {
                    *o = Complex32::new(x.re as f32, x.im as f32);
                }
            }
        }
    }

    /// Renders frames `[start, end)`, frame-major.
    pub fn synth_frames(&self, start: usize, end: usize) -> Vec<Complex32> {
        let len = self.config.raw_frame_len();
        let mut out = vec![Complex32::new(0.0, 0.0); (end - start) * len];
        if end > start {
            exec::for_each_chunk_mut(&mut out, len, |i, f| self.synth_frame(start + i, f));
        }
        out
    }

    pub fn synth_cube(&self) -> RawCube {
        RawCube {
            config: self.config,
            data: self.synth_frames(0, self.config.n_frames),
        }
    }
}

/// Renders a scripted meal. `config.n_frames` sets the cube length; the
/// script must fit inside it.
pub fn synth_raw_cube(script: &MealScript, config: &RadarConfig, seed: u64) -> Result<(RawCube, IntervalTrack), SimError> {
    let synth = meal_synthesizer(script, config, seed, SynthOptions::default())?;
    Ok((synth.synth_cube(), script.annotations()))
}

/// Validates a script against the cube length and builds its synthesizer.
pub fn meal_synthesizer(
    script: &MealScript,
    config: &RadarConfig,
    seed: u64,
    options: SynthOptions,
) -> Result<Synthesizer, SimError> {
    script.validate()?;
    let covered = config.n_frames as f64 / config.fps as f64;
    if let Some(g) = script.gestures.last() {
        if g.end() > covered + 1e-9 {
            return Err(SimError::InvalidScript(format!(
                "last gesture ends at {:.3} s but {} frames cover {covered:.3} s",
                g.end(),
                config.n_frames
            )));
        }
    }
    Synthesizer::new(&Scene::from_script(script), config, seed, options)
}

/// Frames rendered per block by [`synth_rd_cube`].
const STREAM_BLOCK: usize = 64;

/// Renders a scripted meal straight to its (un-normalized) RD cube, block by
/// block, so the full raw cube never sits in memory.
pub fn synth_rd_cube(script: &MealScript, config: &RadarConfig, seed: u64) -> Result<(RdCube, IntervalTrack), SimError> {
    let synth = meal_synthesizer(script, config, seed, SynthOptions::default())?;
    let plan = DspPlan::new(config)?;
    let n = config.n_frames;
    let mut data = Vec::with_capacity(n * config.rd_frame_len());
    let mut start = 0;
    while start < n {
        let end = (start + STREAM_BLOCK).min(n);
        data.extend(process_frames(&plan, &synth.synth_frames(start, end))?);
        start = end;
    }
    let rd = RdCube::new(n, config.crop_doppler, config.crop_range, config.fps, data)?;
    Ok((rd, script.annotations()))
}
