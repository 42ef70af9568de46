use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dataset_io::{Class, Segment, SegmentSet};

fn overlap(a: &Segment, b: &Segment) -> u32 {
    a.end.min(b.end).saturating_sub(a.start.max(b.start))
}

/// `(intersection, union)` in frames.
fn iou_parts(a: &Segment, b: &Segment) -> (u64, u64) {
    let inter = overlap(a, b) as u64;
    (inter, a.len() as u64 + b.len() as u64 - inter)
}

/// Temporal intersection over union of two segments.
pub fn iou(a: &Segment, b: &Segment) -> Result<f64, EvalError> {
    for s in [a, b] {
        if s.is_empty() {
            return Err(EvalError::EmptySegment { start: s.start, end: s.end });
        }
    }
    let (i, u) = iou_parts(a, b);
    Ok(i as f64 / u as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ClassCounts {
    pub fn add(&mut self, o: &ClassCounts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

/// Segment-level counts at one IoU threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub k: f64,
    pub eating: ClassCounts,
    pub drinking: ClassCounts,
    /// True eating gestures found only as drinking.
    pub eating_as_drinking: u64,
    pub drinking_as_eating: u64,
}

impl SegmentOutcome {
    pub fn empty(k: f64) -> Self {
        SegmentOutcome {
            k,
            eating: ClassCounts::default(),
            drinking: ClassCounts::default(),
            eating_as_drinking: 0,
            drinking_as_eating: 0,
        }
    }

    pub fn counts(&self, class: Class) -> &ClassCounts {
        match class {
            Class::Drinking => &self.drinking,
            _ => &self.eating,
        }
    }

    fn counts_mut(&mut self, class: Class) -> &mut ClassCounts {
        match class {
            Class::Drinking => &mut self.drinking,
            _ => &mut self.eating,
        }
    }

    /// Number of true `class` gestures predicted as the other gesture class.
    pub fn confused(&self, class: Class) -> u64 {
        match class {
            Class::Drinking => self.drinking_as_eating,
            _ => self.eating_as_drinking,
        }
    }

    /// Count-summing merge; thresholds must agree.
    pub fn add(&mut self, o: &SegmentOutcome) {
        assert_eq!(self.k, o.k, "merging outcomes at different thresholds");
        self.eating.add(&o.eating);
        self.drinking.add(&o.drinking);
        self.eating_as_drinking += o.eating_as_drinking;
        self.drinking_as_eating += o.drinking_as_eating;
    }
}

/// `2TP / (2TP + FP + FN)`, 0 on an empty outcome.
pub fn segmental_f1(outcome: &SegmentOutcome, class: Class) -> f64 {
    let c = outcome.counts(class);
    let den = 2 * c.tp + c.fp + c.fn_;
    if den == 0 {
        0.0
    } else {
        2.0 * c.tp as f64 / den as f64
    }
}

fn check(set: &SegmentSet) -> Result<(), EvalError> {
    for s in &set.segments {
        if s.is_empty() {
            return Err(EvalError::EmptySegment { start: s.start, end: s.end });
        }
        if s.class == Class::Other {
            return Err(EvalError::OtherSegment);
        }
    }
    for i in 0..set.segments.len() {
        for j in i + 1..set.segments.len() {
            if overlap(&set.segments[i], &set.segments[j]) > 0 {
                return Err(EvalError::Overlap(i, j));
            }
        }
    }
    Ok(())
}

/// Greedy one-to-one matching of same-class segments by descending IoU,
/// ties going to the earlier prediction. Returns `(gt index, pred index)`.
fn greedy_pairs(gt: &[Segment], pred: &[Segment]) -> Vec<(usize, usize)> {
    let mut cand = Vec::new();
    for (gi, g) in gt.iter().enumerate() {
        for (pi, p) in pred.iter().enumerate() {
            if overlap(g, p) > 0 {
                cand.push((gi, pi, iou_parts(g, p)));
            }
        }
    }
    cand.sort_by(|a, b| {
        // exact rational comparison, larger IoU first
        let by_iou = (b.2 .0 * a.2 .1).cmp(&(a.2 .0 * b.2 .1));
        by_iou
            .then(pred[a.1].start.cmp(&pred[b.1].start))
            .then(gt[a.0].start.cmp(&gt[b.0].start))
    });
    let mut gt_used = vec![false; gt.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    for (gi, pi, _) in cand {
        if !gt_used[gi] && !pred_used[pi] {
            gt_used[gi] = true;
            pred_used[pi] = true;
            pairs.push((gi, pi));
        }
    }
    pairs
}

/// Segment-wise TP/FP/FN per gesture class at IoU threshold `k`.
///
/// Each class is matched on its own first. A matched pair is a TP when its
/// IoU reaches `k`; below `k` it is one FP if the prediction is longer than
/// the ground truth and one FN otherwise. Unmatched predictions are FP and
/// unmatched ground-truth segments FN. A ground-truth segment with no
/// same-class overlap that overlaps a prediction of the other class is also
/// tallied as a cross-class confusion; its FN and the other prediction's FP
/// are the ones already counted above.
pub fn segment_match(gt: &SegmentSet, pred: &SegmentSet, k: f64) -> Result<SegmentOutcome, EvalError> {
    if !(k > 0.0 && k < 1.0) {
        return Err(EvalError::Threshold(k));
    }
    check(gt)?;
    check(pred)?;
    let mut out = SegmentOutcome::empty(k);
    for class in Class::GESTURES {
        let g: Vec<Segment> = gt.of_class(class).copied().collect();
        let p: Vec<Segment> = pred.of_class(class).copied().collect();
        let pairs = greedy_pairs(&g, &p);
        let counts = out.counts_mut(class);
        for &(gi, pi) in &pairs {
            let (i, u) = iou_parts(&g[gi], &p[pi]);
            if i as f64 / u as f64 >= k {
                counts.tp += 1;
            } else if g[gi].len() < p[pi].len() {
                counts.fp += 1;
            } else {
                counts.fn_ += 1;
            }
        }
        counts.fp += (p.len() - pairs.len()) as u64;
        counts.fn_ += (g.len() - pairs.len()) as u64;

        let other: Vec<&Segment> = pred.of_class(class.counterpart()).collect();
        let confused = g
            .iter()
            .filter(|s| p.iter().all(|q| overlap(s, q) == 0) && other.iter().any(|q| overlap(s, q) > 0))
            .count() as u64;
        match class {
            Class::Drinking => out.drinking_as_eating += confused,
            _ => out.eating_as_drinking += confused,
        }
    }
    Ok(out)
}
