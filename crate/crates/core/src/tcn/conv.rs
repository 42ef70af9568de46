//! 3D convolution over `[channel][range][doppler][time]` tensors, lowered to
//! GEMM through an im2col buffer.
//!
//! Work is chunked over output positions (one range row, a run of Doppler
//! bins, all frames). Every output element is produced by the same sequence
//! of floating point operations regardless of chunking or sequence length,
//! which keeps inference bit-identical under re-chunking.

use super::scalar::Scalar;
use crate::exec;

/// im2col buffers are capped near this many elements.
const COL_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub in_channels: usize,
    pub out_channels: usize,
    /// Cubic kernel edge, odd.
    pub kernel: usize,
    /// (range, doppler) stride; time stride is always 1.
    pub stride: (usize, usize),
    /// Time dilation; range and Doppler are never dilated.
    pub dilation: usize,
    pub causal: bool,
    pub in_range: usize,
    pub in_doppler: usize,
    pub out_range: usize,
    pub out_doppler: usize,
}

impl ConvGeom {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: (usize, usize),
        dilation: usize,
        causal: bool,
        in_dims: (usize, usize),
    ) -> Self {
        assert!(kernel % 2 == 1, "kernel must be odd");
        let pad = kernel / 2;
        let out = |n: usize, s: usize| (n + 2 * pad - kernel) / s + 1;
        ConvGeom {
            in_channels,
            out_channels,
            kernel,
            stride,
            dilation,
            causal,
            in_range: in_dims.0,
            in_doppler: in_dims.1,
            out_range: out(in_dims.0, stride.0),
            out_doppler: out(in_dims.1, stride.1),
        }
    }

    /// Rows of the im2col matrix (`in_channels · kernel³`).
    pub fn patch_len(&self) -> usize {
        self.in_channels * self.kernel.pow(3)
    }

    pub fn weight_len(&self) -> usize {
        self.out_channels * self.patch_len()
    }

    pub fn in_len(&self, frames: usize) -> usize {
        self.in_channels * self.in_range * self.in_doppler * frames
    }

    pub fn out_len(&self, frames: usize) -> usize {
        self.out_channels * self.out_range * self.out_doppler * frames
    }

    fn pad(&self) -> isize {
        (self.kernel / 2) as isize
    }

    /// Input frame offset read by kernel tap `kt`.
    pub fn time_offset(&self, kt: usize) -> isize {
        let centre = if self.causal { self.kernel - 1 } else { self.kernel / 2 };
        (kt as isize - centre as isize) * self.dilation as isize
    }

    /// Frames of context this convolution reads (past, future).
    pub fn reach(&self) -> (usize, usize) {
        let span = (self.kernel - 1) * self.dilation;
        if self.causal {
            (span, 0)
        } else {
            (span / 2, span / 2)
        }
    }

    fn chunks(&self, frames: usize) -> Vec<(usize, usize, usize)> {
        let per_col = self.patch_len() * frames;
        let step = (COL_BUDGET / per_col.max(1)).clamp(1, self.out_doppler);
        let mut v = Vec::new();
        for ro in 0..self.out_range {
            let mut d0 = 0;
            while d0 < self.out_doppler {
                let d1 = (d0 + step).min(self.out_doppler);
                v.push((ro, d0, d1));
                d0 = d1;
            }
        }
        v
    }

    fn decode_row(&self, row: usize) -> (usize, usize, usize, usize) {
        let k = self.kernel;
        (row / (k * k * k), row / (k * k) % k, row / k % k, row % k)
    }

    /// Input (range, doppler) read by output `(ro, dop)` at tap `(kr, kd)`.
    fn source(&self, ro: usize, dop: usize, kr: usize, kd: usize) -> Option<(usize, usize)> {
        let ri = (ro * self.stride.0 + kr) as isize - self.pad();
        let di = (dop * self.stride.1 + kd) as isize - self.pad();
        let ok = ri >= 0 && di >= 0 && (ri as usize) < self.in_range && (di as usize) < self.in_doppler;
        ok.then_some((ri as usize, di as usize))
    }

    fn valid_frames(&self, kt: usize, frames: usize) -> (usize, usize, isize) {
        let off = self.time_offset(kt);
        let lo = (-off).clamp(0, frames as isize) as usize;
        let hi = (frames as isize - off).clamp(0, frames as isize) as usize;
        (lo, hi.max(lo), off)
    }
}

fn out_channel_block(channels: usize) -> usize {
    channels.div_ceil(exec::num_threads()).max(1)
}

fn im2col<T: Scalar>(g: &ConvGeom, x: &[T], frames: usize, chunk: (usize, usize, usize), col: &mut [T]) {
    let (ro, d0, d1) = chunk;
    let ncols = (d1 - d0) * frames;
    exec::for_each_chunk_mut(col, ncols, |row, dst| {
        let (i, kr, kd, kt) = g.decode_row(row);
        let (lo, hi, off) = g.valid_frames(kt, frames);
        for (j, dop) in (d0..d1).enumerate() {
            let out = &mut dst[j * frames..(j + 1) * frames];
            match g.source(ro, dop, kr, kd) {
                Some((ri, di)) if lo < hi => {
                    let base = ((i * g.in_range + ri) * g.in_doppler + di) * frames;
                    let src = (base as isize + lo as isize + off) as usize;
                    out[..lo].fill(T::zero());
                    out[lo..hi].copy_from_slice(&x[src..src + hi - lo]);
                    out[hi..].fill(T::zero());
                }
                _ => out.fill(T::zero()),
            }
        }
    });
}

fn col2im_add<T: Scalar>(g: &ConvGeom, gcol: &[T], frames: usize, chunk: (usize, usize, usize), gin: &mut [T]) {
    let (ro, d0, d1) = chunk;
    let ncols = (d1 - d0) * frames;
    let taps = g.kernel.pow(3);
    let plane = g.in_range * g.in_doppler * frames;
    exec::for_each_chunk_mut(gin, plane, |i, gin_c| {
        for row in i * taps..(i + 1) * taps {
            let (_, kr, kd, kt) = g.decode_row(row);
            let (lo, hi, off) = g.valid_frames(kt, frames);
            if lo >= hi {
                continue;
            }
            let src_row = &gcol[row * ncols..(row + 1) * ncols];
            for (j, dop) in (d0..d1).enumerate() {
                if let Some((ri, di)) = g.source(ro, dop, kr, kd) {
                    let base = (ri * g.in_doppler + di) * frames;
                    let dst = (base as isize + lo as isize + off) as usize;
                    let src = &src_row[j * frames + lo..j * frames + hi];
                    for (d, s) in gin_c[dst..dst + hi - lo].iter_mut().zip(src) {
                        *d += *s;
                    }
                }
            }
        }
    });
}

/// `out = conv(x) + bias`. `weight` is `[out][in][kr][kd][kt]`.
pub fn conv_forward<T: Scalar>(g: &ConvGeom, weight: &[T], bias: &[T], x: &[T], frames: usize, out: &mut [T]) {
    assert_eq!(weight.len(), g.weight_len());
    assert_eq!(bias.len(), g.out_channels);
    assert_eq!(x.len(), g.in_len(frames));
    assert_eq!(out.len(), g.out_len(frames));
    let k = g.patch_len();
    let plane = g.out_range * g.out_doppler * frames;
    let ob = out_channel_block(g.out_channels);
    let mut col = Vec::new();
    for chunk in g.chunks(frames) {
        let (ro, d0, d1) = chunk;
        let ncols = (d1 - d0) * frames;
        col.resize(k * ncols, T::zero());
        im2col(g, x, frames, chunk, &mut col);
        let base = (ro * g.out_doppler + d0) * frames;
        exec::for_each_chunk_mut(out, ob * plane, |blk, out_blk| {
            let m = out_blk.len() / plane;
            let w = &weight[blk * ob * k..];
            T::gemm(m, k, ncols, w, (k, 1), &col, (ncols, 1), T::zero(), &mut out_blk[base..], (plane, 1));
        });
    }
    exec::for_each_chunk_mut(out, plane, |o, ch| {
        let b = bias[o];
        ch.iter_mut().for_each(|v| *v += b);
    });
}

/// Accumulates parameter gradients into `gw`/`gb` and, if given, the input
/// gradient into `gin` (all `+=`).
#[allow(clippy::too_many_arguments)]
pub fn conv_backward<T: Scalar>(
    g: &ConvGeom,
    weight: &[T],
    x: &[T],
    frames: usize,
    gout: &[T],
    gw: &mut [T],
    gb: &mut [T],
    mut gin: Option<&mut [T]>,
) {
    assert_eq!(x.len(), g.in_len(frames));
    assert_eq!(gout.len(), g.out_len(frames));
    assert_eq!(gw.len(), g.weight_len());
    let k = g.patch_len();
    let plane = g.out_range * g.out_doppler * frames;
    for (o, b) in gb.iter_mut().enumerate() {
        *b += gout[o * plane..(o + 1) * plane].iter().copied().sum::<T>();
    }
    let ob = out_channel_block(g.out_channels);
    let kb = k.div_ceil(exec::num_threads()).max(1);
    let mut col = Vec::new();
    let mut gcol = Vec::new();
    for chunk in g.chunks(frames) {
        let (ro, d0, d1) = chunk;
        let ncols = (d1 - d0) * frames;
        let base = (ro * g.out_doppler + d0) * frames;
        col.resize(k * ncols, T::zero());
        im2col(g, x, frames, chunk, &mut col);
        exec::for_each_chunk_mut(gw, ob * k, |blk, gw_blk| {
            let m = gw_blk.len() / k;
            let a = &gout[blk * ob * plane + base..];
            T::gemm(m, ncols, k, a, (plane, 1), &col, (1, ncols), T::one(), gw_blk, (k, 1));
        });
        if let Some(gin) = gin.as_deref_mut() {
            gcol.resize(k * ncols, T::zero());
            exec::for_each_chunk_mut(&mut gcol, kb * ncols, |blk, gc| {
                let m = gc.len() / ncols;
                let wt = &weight[blk * kb..];
                T::gemm(m, g.out_channels, ncols, wt, (1, k), &gout[base..], (plane, 1), T::zero(), gc, (ncols, 1));
            });
            col2im_add(g, &gcol, frames, chunk, gin);
        }
    }
}
