use serde::{Deserialize, Serialize};

use super::IntervalTrack;

/// Frame class. `Other` is the background: any time not inside a gesture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Class {
    Other = 0,
    Eating = 1,
    Drinking = 2,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Other, Class::Eating, Class::Drinking];
    /// The two gesture classes that form segments.
    pub const GESTURES: [Class; 2] = [Class::Eating, Class::Drinking];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Class> {
        match id {
            0 => Some(Class::Other),
            1 => Some(Class::Eating),
            2 => Some(Class::Drinking),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Annotation-file spelling; `None` for the implicit background class.
    pub fn label(self) -> Option<&'static str> {
        match self {
            Class::Other => None,
            Class::Eating => Some("eating"),
            Class::Drinking => Some("drinking"),
        }
    }

    pub fn name(self) -> &'static str {
        self.label().unwrap_or("other")
    }

    pub fn short(self) -> &'static str {
        match self {
            Class::Other => "N",
            Class::Eating => "E",
            Class::Drinking => "D",
        }
    }

    /// The other gesture class (eating <-> drinking).
    pub fn counterpart(self) -> Class {
        match self {
            Class::Eating => Class::Drinking,
            Class::Drinking => Class::Eating,
            Class::Other => Class::Other,
        }
    }
}

/// One class per radar frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSequence {
    pub labels: Vec<Class>,
    pub fps: f32,
}

impl LabelSequence {
    pub fn new(labels: Vec<Class>, fps: f32) -> Self {
        LabelSequence { labels, fps }
    }

    pub fn from_ids(ids: &[u8], fps: f32) -> Option<Self> {
        let labels = ids.iter().map(|&i| Class::from_id(i)).collect::<Option<Vec<_>>>()?;
        Some(LabelSequence { labels, fps })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ids(&self) -> Vec<u8> {
        self.labels.iter().map(|c| c.id()).collect()
    }
}

/// Half-open frame interval `[start, end)` of one gesture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub class: Class,
    pub start: u32,
    pub end: u32,
}

impl Segment {
    pub fn new(class: Class, start: u32, end: u32) -> Self {
        Segment { class, start, end }
    }

    pub fn len(&self) -> u32 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Sorted, non-overlapping gesture segments (never class `Other`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
}

impl SegmentSet {
    pub fn new(segments: Vec<Segment>) -> Self {
        SegmentSet { segments }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn of_class(&self, class: Class) -> impl Iterator<Item = &Segment> + '_ {
        self.segments.iter().filter(move |s| s.class == class)
    }
}

/// Rasterises an interval track: frame `t` takes the class of the interval
/// containing its centre time `(t + 0.5) / fps`, or `Other`.
pub fn intervals_to_frame_labels(track: &IntervalTrack, n_frames: u32, fps: f32) -> LabelSequence {
    assert!(fps > 0.0, "fps must be positive");
    let fps64 = fps as f64;
    let n = n_frames as usize;
    let mut labels = vec![Class::Other; n];
    let center = |t: usize| (t as f64 + 0.5) / fps64;
    for iv in &track.entries {
        // first candidate frame, then correct for rounding with the exact predicate
        let mut t = ((iv.start * fps64 - 0.5).floor().max(0.0) as usize).saturating_sub(1);
        while t < n && center(t) < iv.start {
            t += 1;
        }
        while t < n && center(t) < iv.end {
            labels[t] = iv.class;
            t += 1;
        }
    }
    LabelSequence { labels, fps }
}

/// Run-length view: each maximal run of a gesture class becomes one segment.
pub fn frame_labels_to_segments(seq: &LabelSequence) -> SegmentSet {
    let mut segments = Vec::new();
    let mut run_start = 0usize;
    for t in 1..=seq.labels.len() {
        let boundary = t == seq.labels.len() || seq.labels[t] != seq.labels[run_start];
        if boundary {
            let class = seq.labels[run_start];
            if class != Class::Other {
                segments.push(Segment::new(class, run_start as u32, t as u32));
            }
            run_start = t;
        }
    }
    SegmentSet { segments }
}
