use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Class, FormatError, LabelSequence};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    frame: u32,
    label_id: u8,
}

/// Writes `frame,label_id` rows, one per frame.
pub fn write_predictions(path: &Path, seq: &LabelSequence) -> Result<(), FormatError> {
    let err = |e: csv::Error| FormatError::Csv {
        line: 0,
        msg: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    if seq.is_empty() {
        w.write_record(["frame", "label_id"]).map_err(err)?;
    }
    for (t, c) in seq.labels.iter().enumerate() {
        w.serialize(Row {
            frame: t as u32,
            label_id: c.id(),
        })
        .map_err(err)?;
    }
    w.flush().map_err(|e| FormatError::io(path, e))
}

/// Reads a prediction CSV; frames must be listed in order starting at 0.
pub fn read_predictions(path: &Path, fps: f32) -> Result<LabelSequence, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| FormatError::Csv {
            line: 0,
            msg: e.to_string(),
        })?;
    let mut labels = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| FormatError::Csv {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = labels.len() as u64 + 2;
        if row.frame as usize != labels.len() {
            return Err(FormatError::Csv {
                line,
                msg: format!("expected frame {}, found {}", labels.len(), row.frame),
            });
        }
        let class = Class::from_id(row.label_id).ok_or_else(|| FormatError::Csv {
            line,
            msg: format!("label id {} is not 0, 1 or 2", row.label_id),
        })?;
        labels.push(class);
    }
    Ok(LabelSequence::new(labels, fps))
}
