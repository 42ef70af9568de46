//! Figure output: 16-bit binary PGM and plain CSV matrices.

use std::io::Write;
use std::path::Path;

/// Row-major real matrix ready for rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl Image {
    /// Frame `t` of an RD cube: rows are Doppler bins, columns range bins.
    pub fn rd_frame(rd: &super::RdCube, t: usize) -> Result<Image, super::DspError> {
        if t >= rd.n_frames {
            return Err(super::DspError::FrameOutOfRange {
                index: t,
                n_frames: rd.n_frames,
            });
        }
        Ok(Image {
            rows: rd.n_doppler,
            cols: rd.n_range,
            data: rd.frame(t).to_vec(),
        })
    }

    /// Doppler-time map with Doppler bins as rows and frames as columns.
    pub fn dt_map(dt: &super::DtMap) -> Image {
        let mut data = vec![0f32; dt.data.len()];
        for t in 0..dt.n_frames {
            for d in 0..dt.n_doppler {
                data[d * dt.n_frames + t] = dt.data[t * dt.n_doppler + d];
            }
        }
        Image {
            rows: dt.n_doppler,
            cols: dt.n_frames,
            data,
        }
    }
}

/// Writes a `P5` PGM with maxval 65535 (big-endian samples), min-max scaled.
pub fn render_pgm(path: &Path, img: &Image) -> std::io::Result<()> {
    let (lo, hi) = img
        .data
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = (hi - lo) as f64;
    let mut out = format!("P5\n{} {}\n65535\n", img.cols, img.rows).into_bytes();
    for &v in &img.data {
        let level = if span > 0.0 {
            (((v - lo) as f64 / span) * 65535.0).round() as u16
        } else {
            0
        };
        out.extend_from_slice(&level.to_be_bytes());
    }
    std::fs::write(path, out)
}

/// Comma-separated rows; values use the shortest representation that parses
/// back to the same `f32`.
pub fn render_csv(path: &Path, img: &Image) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for row in img.data.chunks(img.cols.max(1)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

pub fn read_csv_matrix(path: &Path) -> std::io::Result<Image> {
    let text = std::fs::read_to_string(path)?;
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row: Vec<f32> = line
            .split(',')
            .map(|s| s.trim().parse::<f32>())
            .collect::<Result<_, _>>()
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        cols = row.len();
        data.extend(row);
        rows += 1;
    }
    Ok(Image { rows, cols, data })
}
