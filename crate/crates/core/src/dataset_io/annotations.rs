use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Class, FormatError};

/// A gesture annotation in seconds, half-open `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub class: Class,
}

impl Interval {
    pub fn new(start: f64, end: f64, class: Class) -> Self {
        Interval { start, end, class }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Sorted, non-overlapping gesture intervals of one meal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalTrack {
    pub entries: Vec<Interval>,
}

impl IntervalTrack {
    /// Sorts by start time and validates.
    pub fn new(mut entries: Vec<Interval>) -> Result<Self, FormatError> {
        entries.sort_by(|a, b| a.start.total_cmp(&b.start));
        for (index, iv) in entries.iter().enumerate() {
            if !(iv.start < iv.end) {
                return Err(FormatError::EmptyInterval {
                    index,
                    start: iv.start,
                    end: iv.end,
                });
            }
            if iv.class == Class::Other {
                return Err(FormatError::UnknownLabel("other".into()));
            }
        }
        if let Some(index) = entries.windows(2).position(|w| w[1].start < w[0].end) {
            return Err(FormatError::Overlap { index: index + 1 });
        }
        Ok(IntervalTrack { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct Row {
    start_s: f64,
    end_s: f64,
    label: String,
}

fn parse_label(s: &str) -> Result<Class, FormatError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "eating" => Ok(Class::Eating),
        "drinking" => Ok(Class::Drinking),
        other => Err(FormatError::UnknownLabel(other.to_string())),
    }
}

fn csv_err(e: csv::Error) -> FormatError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    FormatError::Csv {
        line,
        msg: e.to_string(),
    }
}

/// Reads an annotation CSV with header `start_s,end_s,label`.
pub fn read_annotations(path: &Path) -> Result<IntervalTrack, FormatError> {
    let file = std::fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    read_annotations_from(file)
}

pub(crate) fn read_annotations_from<R: std::io::Read>(reader: R) -> Result<IntervalTrack, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut entries = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(csv_err)?;
        entries.push(Interval::new(row.start_s, row.end_s, parse_label(&row.label)?));
    }
    IntervalTrack::new(entries)
}

pub fn write_annotations(path: &Path, track: &IntervalTrack) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    if track.is_empty() {
        w.write_record(["start_s", "end_s", "label"]).map_err(csv_err)?;
    }
    for iv in &track.entries {
        w.serialize(Row {
            start_s: iv.start,
            end_s: iv.end,
            label: iv.class.label().unwrap_or("other").to_string(),
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| FormatError::io(path, e))
}
