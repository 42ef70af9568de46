use std::sync::Arc;

use num_complex::Complex32;
use rustfft::{Fft, FftPlanner};

use super::{check_len, DopplerCube, DspError, DtMap, MagnitudeCube, RadarConfig, RawCube, RdCube, RpCube};
use crate::exec;

/// FFT plans for one radar geometry.
#[derive(Clone)]
pub struct DspPlan {
    config: RadarConfig,
    range: Arc<dyn Fft<f32>>,
    doppler: Arc<dyn Fft<f32>>,
}

impl std::fmt::Debug for DspPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DspPlan").field("config", &self.config).finish()
    }
}

impl DspPlan {
    pub fn new(config: &RadarConfig) -> Result<Self, DspError> {
        config.validate()?;
        let mut planner = FftPlanner::new();
        Ok(DspPlan {
            config: *config,
            range: planner.plan_fft_forward(config.n_samples),
            doppler: planner.plan_fft_forward(config.n_chirps),
        })
    }

    pub fn config(&self) -> &RadarConfig {
        &self.config
    }
}

// ---- per-frame kernels ----------------------------------------------------

fn range_fft_frame(plan: &DspPlan, frame: &mut [Complex32]) {
    plan.range.process(frame);
}

/// Subtracts the mean chirp of every antenna block `[chirps, range]`.
fn remove_static_frame(cfg: &RadarConfig, frame: &mut [Complex32]) {
    let (nc, nr) = (cfg.n_chirps, cfg.n_samples);
    let mut mean = vec![(0f64, 0f64); nr];
    for block in frame.chunks_exact_mut(nc * nr) {
        mean.iter_mut().for_each(|m| *m = (0.0, 0.0));
        for chirp in block.chunks_exact(nr) {
            for (m, v) in mean.iter_mut().zip(chirp) {
                m.0 += v.re as f64;
                m.1 += v.im as f64;
            }
        }
        let mean: Vec<Complex32> = mean
            .iter()
            .map(|&(re, im)| Complex32::new((re / nc as f64) as f32, (im / nc as f64) as f32))
            .collect();
        for chirp in block.chunks_exact_mut(nr) {
            for (v, m) in chirp.iter_mut().zip(&mean) {
                *v -= m;
            }
        }
    }
}

/// Slow-time FFT per range bin, centre-shifted: output row `nc/2 + m` holds
/// Doppler bin `m` (negative `m` wraps from the top of the raw spectrum).
fn doppler_fft_frame(plan: &DspPlan, input: &[Complex32], out: &mut [Complex32]) {
    let cfg = &plan.config;
    let (nc, nr) = (cfg.n_chirps, cfg.n_samples);
    let half = nc / 2;
    let mut columns = vec![Complex32::new(0.0, 0.0); nc * nr];
    for (block_in, block_out) in input.chunks_exact(nc * nr).zip(out.chunks_exact_mut(nc * nr)) {
        for i in 0..nc {
            for j in 0..nr {
                columns[j * nc + i] = block_in[i * nr + j];
            }
        }
        plan.doppler.process(&mut columns);
        for j in 0..nr {
            for k in 0..nc {
                block_out[((k + half) % nc) * nr + j] = columns[j * nc + k];
            }
        }
    }
}

/// Mean over antennas of the per-antenna magnitude.
fn rx_superpose_frame(cfg: &RadarConfig, input: &[Complex32], out: &mut [f32]) {
    let plane = cfg.n_chirps * cfg.n_samples;
    let nv = cfg.n_virtual_antennas;
    for (p, o) in out.iter_mut().enumerate() {
        let mut acc = 0f64;
        for a in 0..nv {
            acc += input[a * plane + p].norm() as f64;
        }
        *o = (acc / nv as f64) as f32;
    }
}

fn crop_frame(n_doppler: usize, n_range: usize, crop_doppler: usize, crop_range: usize, input: &[f32], out: &mut [f32]) {
    let d0 = n_doppler / 2 - crop_doppler / 2;
    for (row, o) in out.chunks_exact_mut(crop_range).enumerate() {
        let src = (d0 + row) * n_range;
        o.copy_from_slice(&input[src..src + crop_range]);
    }
}

// ---- whole-cube stages ----------------------------------------------------

pub fn range_fft(raw: &RawCube) -> RpCube {
    let plan = DspPlan::new(&raw.config).expect("RawCube holds a validated config");
    let mut data = raw.data.clone();
    exec::for_each_chunk_mut(&mut data, raw.config.raw_frame_len(), |_, f| range_fft_frame(&plan, f));
    RpCube {
        config: raw.config,
        data,
    }
}

pub fn remove_static(rp: &RpCube) -> RpCube {
    let cfg = rp.config;
    let mut data = rp.data.clone();
    exec::for_each_chunk_mut(&mut data, cfg.raw_frame_len(), |_, f| remove_static_frame(&cfg, f));
    RpCube { config: cfg, data }
}

pub fn doppler_fft(rp: &RpCube) -> DopplerCube {
    let plan = DspPlan::new(&rp.config).expect("RpCube holds a validated config");
    let len = rp.config.raw_frame_len();
    let mut data = vec![Complex32::new(0.0, 0.0); rp.data.len()];
    exec::for_each_chunk_mut(&mut data, len, |t, out| {
        doppler_fft_frame(&plan, &rp.data[t * len..(t + 1) * len], out)
    });
    DopplerCube {
        config: rp.config,
        data,
    }
}

pub fn rx_superpose(rd1: &DopplerCube) -> MagnitudeCube {
    let cfg = rd1.config;
    let in_len = cfg.raw_frame_len();
    let out_len = cfg.n_chirps * cfg.n_samples;
    let mut data = vec![0f32; cfg.n_frames * out_len];
    exec::for_each_chunk_mut(&mut data, out_len, |t, out| {
        rx_superpose_frame(&cfg, &rd1.data[t * in_len..(t + 1) * in_len], out)
    });
    RdCube {
        n_frames: cfg.n_frames,
        n_doppler: cfg.n_chirps,
        n_range: cfg.n_samples,
        fps: cfg.fps,
        data,
    }
}

/// Keeps `crop_doppler` Doppler rows centred on zero velocity and range bins
/// `0..crop_range`.
pub fn crop_roi(rd2: &MagnitudeCube, config: &RadarConfig) -> Result<RdCube, DspError> {
    let (cd, cr) = (config.crop_doppler, config.crop_range);
    if cd > rd2.n_doppler || cr > rd2.n_range || cd % 2 != 0 {
        return Err(DspError::CropTooLarge {
            crop_doppler: cd,
            crop_range: cr,
            n_doppler: rd2.n_doppler,
            n_range: rd2.n_range,
        });
    }
    check_len(&[rd2.n_frames, rd2.n_doppler, rd2.n_range], rd2.data.len())?;
    let in_len = rd2.frame_len();
    let mut data = vec![0f32; rd2.n_frames * cd * cr];
    if !data.is_empty() {
        exec::for_each_chunk_mut(&mut data, cd * cr, |t, out| {
            crop_frame(rd2.n_doppler, rd2.n_range, cd, cr, &rd2.data[t * in_len..(t + 1) * in_len], out)
        });
    }
    Ok(RdCube {
        n_frames: rd2.n_frames,
        n_doppler: cd,
        n_range: cr,
        fps: rd2.fps,
        data,
    })
}

/// Range-averaged RD cube: `DT(t, n) = mean_j RD(t, n, j)`.
pub fn dt_map(rd: &RdCube) -> DtMap {
    let mut data = vec![0f32; rd.n_frames * rd.n_doppler];
    for (row, out) in rd.data.chunks_exact(rd.n_range).zip(data.iter_mut()) {
        let sum: f64 = row.iter().map(|&v| v as f64).sum();
        *out = (sum / rd.n_range as f64) as f32;
    }
    DtMap {
        n_frames: rd.n_frames,
        n_doppler: rd.n_doppler,
        fps: rd.fps,
        data,
    }
}

// ---- fused ----------------------------------------------------------------

/// Runs the full chain on one raw frame, writing the cropped RD frame.
pub fn process_frame(plan: &DspPlan, raw_frame: &[Complex32], out: &mut [f32]) {
    let cfg = &plan.config;
    let mut buf = raw_frame.to_vec();
    range_fft_frame(plan, &mut buf);
    remove_static_frame(cfg, &mut buf);
    let mut rd1 = vec![Complex32::new(0.0, 0.0); buf.len()];
    doppler_fft_frame(plan, &buf, &mut rd1);
    let mut rd2 = vec![0f32; cfg.n_chirps * cfg.n_samples];
    rx_superpose_frame(cfg, &rd1, &mut rd2);
    crop_frame(cfg.n_chirps, cfg.n_samples, cfg.crop_doppler, cfg.crop_range, &rd2, out);
}

/// Processes a run of consecutive raw frames (frame-major) into cropped RD frames.
pub fn process_frames(plan: &DspPlan, raw: &[Complex32]) -> Result<Vec<f32>, DspError> {
    let cfg = plan.config;
    let in_len = cfg.raw_frame_len();
    if raw.len() % in_len != 0 {
        return Err(DspError::ShapeMismatch {
            shape: vec![raw.len() / in_len + 1, cfg.n_virtual_antennas, cfg.n_chirps, cfg.n_samples],
            expected: (raw.len() / in_len + 1) * in_len,
            actual: raw.len(),
        });
    }
    let n = raw.len() / in_len;
    let out_len = cfg.rd_frame_len();
    let mut out = vec![0f32; n * out_len];
    if n > 0 {
        exec::for_each_chunk_mut(&mut out, out_len, |t, o| {
            process_frame(plan, &raw[t * in_len..(t + 1) * in_len], o)
        });
    }
    Ok(out)
}

/// range_fft -> remove_static -> doppler_fft -> rx_superpose -> crop_roi.
pub fn process_meal(raw: &RawCube) -> RdCube {
    let plan = DspPlan::new(&raw.config).expect("RawCube holds a validated config");
    let data = process_frames(&plan, &raw.data).expect("RawCube length matches its config");
    RdCube {
        n_frames: raw.config.n_frames,
        n_doppler: raw.config.crop_doppler,
        n_range: raw.config.crop_range,
        fps: raw.config.fps,
        data,
    }
}
