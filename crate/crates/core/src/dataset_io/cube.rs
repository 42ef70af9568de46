use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex32;

use super::FormatError;

pub const MAGIC: [u8; 4] = *b"EATR";
pub const CUBE_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;
const MAX_DIMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CubeKind {
    /// Complex beat samples, `[frames, antennas, chirps, samples]`.
    RawComplex = 1,
    /// Range-Doppler magnitudes, `[frames, doppler, range]`.
    RdReal = 2,
    /// Doppler-time map, `[frames, doppler]`.
    DtReal = 3,
}

impl CubeKind {
    fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(CubeKind::RawComplex),
            2 => Some(CubeKind::RdReal),
            3 => Some(CubeKind::DtReal),
            _ => None,
        }
    }

    pub fn scalar(self) -> ScalarType {
        match self {
            CubeKind::RawComplex => ScalarType::Complex64,
            CubeKind::RdReal | CubeKind::DtReal => ScalarType::Float32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ScalarType {
    /// Interleaved little-endian `f32` real/imaginary pairs.
    Complex64 = 1,
    Float32 = 2,
}

impl ScalarType {
    fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(ScalarType::Complex64),
            2 => Some(ScalarType::Float32),
            _ => None,
        }
    }

    pub fn size(self) -> usize {
        match self {
            ScalarType::Complex64 => 8,
            ScalarType::Float32 => 4,
        }
    }
}

/// Header of an `.eatr` file.
///
/// On disk (all little-endian):
///
/// ```text
/// 0..4    magic "EATR"
/// 4..6    version (u16)
/// 6       kind (u8)
/// 7       scalar (u8)
/// 8       number of dims (u8, 1..=4)
/// 9..12   zero
/// 12..28  dims, u32 each, unused slots zero
/// 28..32  fps (f32)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct CubeHeader {
    pub version: u16,
    pub kind: CubeKind,
    pub dims: Vec<u32>,
    pub fps: f32,
    pub scalar: ScalarType,
}

impl CubeHeader {
    pub fn new(kind: CubeKind, dims: Vec<u32>, fps: f32) -> Self {
        CubeHeader {
            version: CUBE_VERSION,
            kind,
            dims,
            fps,
            scalar: kind.scalar(),
        }
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        if self.version != CUBE_VERSION {
            return Err(FormatError::UnsupportedVersion(self.version));
        }
        if self.dims.is_empty() || self.dims.len() > MAX_DIMS {
            return Err(FormatError::InvalidHeader(format!(
                "{} dims, expected 1 to {MAX_DIMS}",
                self.dims.len()
            )));
        }
        if self.dims.contains(&0) {
            return Err(FormatError::InvalidHeader(format!("zero-sized dim in {:?}", self.dims)));
        }
        if self.kind.scalar() != self.scalar {
            return Err(FormatError::KindScalarMismatch {
                kind: self.kind,
                scalar: self.scalar,
            });
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(FormatError::InvalidHeader(format!("fps {} must be positive", self.fps)));
        }
        Ok(())
    }

    pub fn element_count(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    /// Elements per step of the first dimension.
    pub fn frame_len(&self) -> usize {
        self.dims[1..].iter().map(|&d| d as usize).product()
    }

    pub fn payload_bytes(&self) -> u64 {
        self.element_count() as u64 * self.scalar.size() as u64
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6] = self.kind as u8;
        b[7] = self.scalar as u8;
        b[8] = self.dims.len() as u8;
        for (i, d) in self.dims.iter().enumerate() {
            b[12 + 4 * i..16 + 4 * i].copy_from_slice(&d.to_le_bytes());
        }
        b[28..32].copy_from_slice(&self.fps.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self, FormatError> {
        let magic = [b[0], b[1], b[2], b[3]];
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != CUBE_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let kind = CubeKind::from_code(b[6])
            .ok_or_else(|| FormatError::InvalidHeader(format!("unknown kind code {}", b[6])))?;
        let scalar = ScalarType::from_code(b[7])
            .ok_or_else(|| FormatError::InvalidHeader(format!("unknown scalar code {}", b[7])))?;
        let ndims = b[8] as usize;
        if ndims == 0 || ndims > MAX_DIMS {
            return Err(FormatError::InvalidHeader(format!("{ndims} dims")));
        }
        let dims = (0..ndims)
            .map(|i| u32::from_le_bytes(b[12 + 4 * i..16 + 4 * i].try_into().unwrap()))
            .collect();
        let fps = f32::from_le_bytes(b[28..32].try_into().unwrap());
        let header = CubeHeader {
            version,
            kind,
            dims,
            fps,
            scalar,
        };
        header.validate()?;
        Ok(header)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Complex(Vec<Complex32>),
    Real(Vec<f32>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Complex(v) => v.len(),
            Payload::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scalar(&self) -> ScalarType {
        match self {
            Payload::Complex(_) => ScalarType::Complex64,
            Payload::Real(_) => ScalarType::Float32,
        }
    }

    pub fn into_real(self) -> Option<Vec<f32>> {
        match self {
            Payload::Real(v) => Some(v),
            Payload::Complex(_) => None,
        }
    }

    pub fn into_complex(self) -> Option<Vec<Complex32>> {
        match self {
            Payload::Complex(v) => Some(v),
            Payload::Real(_) => None,
        }
    }
}

/// Writes a complete cube file.
pub fn write_cube(path: &Path, header: &CubeHeader, payload: &Payload) -> Result<(), FormatError> {
    let mut w = CubeWriter::create(path, header.clone())?;
    match payload {
        Payload::Complex(v) => w.write_complex(v)?,
        Payload::Real(v) => w.write_real(v)?,
    }
    w.finish()
}

/// Reads a complete cube file.
pub fn read_cube(path: &Path) -> Result<(CubeHeader, Payload), FormatError> {
    let mut r = CubeReader::open(path)?;
    let n_frames = r.header().dims[0] as usize;
    let payload = r.read_frames(n_frames)?;
    Ok((r.header, payload))
}

/// Streaming cube writer for payloads too large to hold in memory.
pub struct CubeWriter {
    path: PathBuf,
    out: BufWriter<File>,
    header: CubeHeader,
    written: usize,
}

impl CubeWriter {
    pub fn create(path: &Path, header: CubeHeader) -> Result<Self, FormatError> {
        header.validate()?;
        let file = File::create(path).map_err(|e| FormatError::io(path, e))?;
        let mut out = BufWriter::with_capacity(1 << 20, file);
        out.write_all(&header.to_bytes())
            .map_err(|e| FormatError::io(path, e))?;
        Ok(CubeWriter {
            path: path.to_owned(),
            out,
            header,
            written: 0,
        })
    }

    fn check_room(&self, scalar: ScalarType, n: usize) -> Result<(), FormatError> {
        if scalar != self.header.scalar {
            return Err(FormatError::KindScalarMismatch {
                kind: self.header.kind,
                scalar,
            });
        }
        if self.written + n > self.header.element_count() {
            return Err(FormatError::PayloadMismatch {
                dims: self.header.dims.clone(),
                expected: self.header.element_count(),
                actual: self.written + n,
            });
        }
        Ok(())
    }

    pub fn write_real(&mut self, values: &[f32]) -> Result<(), FormatError> {
        self.check_room(ScalarType::Float32, values.len())?;
        let mut buf = Vec::with_capacity(values.len() * 4);
        for v in values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        self.out.write_all(&buf).map_err(|e| FormatError::io(&self.path, e))?;
        self.written += values.len();
        Ok(())
    }

    pub fn write_complex(&mut self, values: &[Complex32]) -> Result<(), FormatError> {
        self.check_room(ScalarType::Complex64, values.len())?;
        let mut buf = Vec::with_capacity(values.len() * 8);
        for v in values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        self.out.write_all(&buf).map_err(|e| FormatError::io(&self.path, e))?;
        self.written += values.len();
        Ok(())
    }

    /// Flushes the file; fails if fewer elements were written than the dims declare.
    pub fn finish(mut self) -> Result<(), FormatError> {
        if self.written != self.header.element_count() {
            return Err(FormatError::PayloadMismatch {
                dims: self.header.dims.clone(),
                expected: self.header.element_count(),
                actual: self.written,
            });
        }
        self.out.flush().map_err(|e| FormatError::io(&self.path, e))
    }
}

/// Streaming cube reader, frame (first-dimension step) at a time.
pub struct CubeReader {
    path: PathBuf,
    input: BufReader<File>,
    header: CubeHeader,
    frames_read: usize,
}

impl CubeReader {
    pub fn open(path: &Path) -> Result<Self, FormatError> {
        let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
        let file_len = file.metadata().map_err(|e| FormatError::io(path, e))?.len();
        let mut input = BufReader::with_capacity(1 << 20, file);
        let mut raw = [0u8; HEADER_LEN];
        if file_len < HEADER_LEN as u64 {
            return Err(FormatError::Truncated {
                expected: HEADER_LEN as u64,
                found: file_len,
            });
        }
        input.read_exact(&mut raw).map_err(|e| FormatError::io(path, e))?;
        let header = CubeHeader::from_bytes(&raw)?;
        let expected = HEADER_LEN as u64 + header.payload_bytes();
        if file_len < expected {
            return Err(FormatError::Truncated {
                expected,
                found: file_len,
            });
        }
        Ok(CubeReader {
            path: path.to_owned(),
            input,
            header,
            frames_read: 0,
        })
    }

    pub fn header(&self) -> &CubeHeader {
        &self.header
    }

    pub fn frames_remaining(&self) -> usize {
        self.header.dims[0] as usize - self.frames_read
    }

    /// Reads up to `n` frames; returns fewer only at the end of the cube.
    pub fn read_frames(&mut self, n: usize) -> Result<Payload, FormatError> {
        let n = n.min(self.frames_remaining());
        let count = n * self.header.frame_len();
        let mut bytes = vec![0u8; count * self.header.scalar.size()];
        self.input
            .read_exact(&mut bytes)
            .map_err(|e| FormatError::io(&self.path, e))?;
        self.frames_read += n;
        Ok(match self.header.scalar {
            ScalarType::Float32 => Payload::Real(
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            ScalarType::Complex64 => Payload::Complex(
                bytes
                    .chunks_exact(8)
                    .map(|c| {
                        Complex32::new(
                            f32::from_le_bytes(c[0..4].try_into().unwrap()),
                            f32::from_le_bytes(c[4..8].try_into().unwrap()),
                        )
                    })
                    .collect(),
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn rd_file_size_matches_layout() {
        let dir = tmp();
        let path = dir.path().join("rd.eatr");
        let header = CubeHeader::new(CubeKind::RdReal, vec![10, 64, 32], 25.0);
        let payload = Payload::Real((0..10 * 64 * 32).map(|i| i as f32 * 0.5).collect());
        write_cube(&path, &header, &payload).unwrap();
        let len = std::fs::metadata(&path).unwrap().len();
        assert_eq!(len, 32 + 10 * 64 * 32 * 4);

        let (h2, p2) = read_cube(&path).unwrap();
        assert_eq!(h2, header);
        assert_eq!(p2, payload);
    }

    #[test]
    fn header_layout_is_fixed() {
        let header = CubeHeader::new(CubeKind::RawComplex, vec![2, 4, 8, 16], 25.0);
        let b = header.to_bytes();
        assert_eq!(&b[0..4], b"EATR");
        assert_eq!(u16::from_le_bytes([b[4], b[5]]), 1);
        assert_eq!(b[6], 1);
        assert_eq!(b[7], 1);
        assert_eq!(b[8], 4);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(b[24..28].try_into().unwrap()), 16);
        assert_eq!(f32::from_le_bytes(b[28..32].try_into().unwrap()), 25.0);
    }

    #[test]
    fn complex_payload_under_rd_kind_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("bad.eatr");
        let header = CubeHeader::new(CubeKind::RdReal, vec![1, 2, 2], 25.0);
        let payload = Payload::Complex(vec![Complex32::new(1.0, 0.0); 4]);
        let err = write_cube(&path, &header, &payload).unwrap_err();
        assert!(matches!(err, FormatError::KindScalarMismatch { .. }), "{err}");

        let mut bad = header.clone();
        bad.scalar = ScalarType::Complex64;
        assert!(matches!(bad.validate(), Err(FormatError::KindScalarMismatch { .. })));
    }

    #[test]
    fn payload_length_mismatch_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("short.eatr");
        let header = CubeHeader::new(CubeKind::DtReal, vec![3, 4], 25.0);
        let err = write_cube(&path, &header, &Payload::Real(vec![0.0; 11])).unwrap_err();
        assert!(matches!(err, FormatError::PayloadMismatch { .. }));
        let err = write_cube(&path, &header, &Payload::Real(vec![0.0; 13])).unwrap_err();
        assert!(matches!(err, FormatError::PayloadMismatch { .. }));
    }

    #[test]
    fn bad_magic() {
        let dir = tmp();
        let path = dir.path().join("x.eatr");
        let mut bytes = CubeHeader::new(CubeKind::DtReal, vec![1, 1], 25.0).to_bytes().to_vec();
        bytes[0..4].copy_from_slice(b"XXXX");
        bytes.extend_from_slice(&0f32.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_cube(&path), Err(FormatError::BadMagic(m)) if &m == b"XXXX"));
    }

    #[test]
    fn unsupported_version() {
        let dir = tmp();
        let path = dir.path().join("v.eatr");
        let mut bytes = CubeHeader::new(CubeKind::DtReal, vec![1, 1], 25.0).to_bytes().to_vec();
        bytes[4..6].copy_from_slice(&7u16.to_le_bytes());
        bytes.extend_from_slice(&0f32.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_cube(&path), Err(FormatError::UnsupportedVersion(7))));
    }

    #[test]
    fn truncated_payload() {
        let dir = tmp();
        let path = dir.path().join("t.eatr");
        let header = CubeHeader::new(CubeKind::RdReal, vec![4, 8, 8], 25.0);
        write_cube(&path, &header, &Payload::Real(vec![1.0; 256])).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 100]).unwrap();
        assert!(matches!(read_cube(&path), Err(FormatError::Truncated { .. })));
    }

    #[test]
    fn streaming_reader_returns_frames_in_order() {
        let dir = tmp();
        let path = dir.path().join("s.eatr");
        let header = CubeHeader::new(CubeKind::DtReal, vec![5, 3], 25.0);
        let data: Vec<f32> = (0..15).map(|i| i as f32).collect();
        write_cube(&path, &header, &Payload::Real(data.clone())).unwrap();
        let mut r = CubeReader::open(&path).unwrap();
        let a = r.read_frames(2).unwrap().into_real().unwrap();
        let b = r.read_frames(10).unwrap().into_real().unwrap();
        assert_eq!(a, &data[..6]);
        assert_eq!(b, &data[6..]);
        assert_eq!(r.frames_remaining(), 0);
    }
}
