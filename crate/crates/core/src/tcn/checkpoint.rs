//! Checkpoint layout: 8-byte magic, u32 header length, JSON header echoing
//! the model configuration and the parameter table, then every parameter as
//! little-endian f32 in table order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::model::{build_model, Model};
use super::TcnError;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"EATRTCN1";

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    params: Vec<(String, usize)>,
}

pub fn write_checkpoint(path: &Path, model: &Model<f32>) -> Result<(), TcnError> {
    let header = Header {
        config: model.config.clone(),
        params: model.param_names().into_iter().zip(model.params().iter().map(|p| p.len())).collect(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| TcnError::Checkpoint(e.to_string()))?;
    let io = |e| TcnError::io(path, e);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    f.write_all(CHECKPOINT_MAGIC).map_err(io)?;
    f.write_all(&(json.len() as u32).to_le_bytes()).map_err(io)?;
    f.write_all(&json).map_err(io)?;
    for p in model.params() {
        for v in p {
            f.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    f.flush().map_err(io)
}

pub fn read_checkpoint(path: &Path) -> Result<Model<f32>, TcnError> {
    let bytes = std::fs::read(path).map_err(|e| TcnError::io(path, e))?;
    let mut r = bytes.as_slice();
    let bad = |m: &str| TcnError::Checkpoint(format!("{}: {m}", path.display()));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("truncated"))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint"));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len).map_err(|_| bad("truncated"))?;
    let len = u32::from_le_bytes(len) as usize;
    if r.len() < len {
        return Err(bad("truncated header"));
    }
    let header: Header = serde_json::from_slice(&r[..len]).map_err(|e| bad(&e.to_string()))?;
    r = &r[len..];
    let mut model = build_model::<f32>(&header.config, 0)?;
    let expected: Vec<(String, usize)> =
        model.param_names().into_iter().zip(model.params().iter().map(|p| p.len())).collect();
    if expected != header.params {
        return Err(bad("parameter table does not match the configuration"));
    }
    let total: usize = expected.iter().map(|(_, n)| n).sum();
    if r.len() != total * 4 {
        return Err(bad(&format!("expected {} parameter bytes, found {}", total * 4, r.len())));
    }
    let mut values = r.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
    for p in model.params_mut() {
        for v in p.iter_mut() {
            *v = values.next().expect("length checked");
        }
    }
    if !model.is_finite() {
        return Err(bad("non-finite parameters"));
    }
    Ok(model)
}
