use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::frame::{cohen_kappa, frame_confusion, frame_f1, ConfusionMatrix};
use super::segment::{segment_match, segmental_f1, SegmentOutcome};
use super::EvalError;
use crate::dataset_io::{frame_labels_to_segments, Class, LabelSequence};

/// IoU thresholds reported by default.
pub const DEFAULT_KS: [f64; 3] = [0.1, 0.25, 0.5];

/// Counts behind every score; scores are derived on demand so that reports
/// of several meals can be pooled by summing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub segments: Vec<SegmentOutcome>,
}

pub fn evaluate_meal(gt: &LabelSequence, pred: &LabelSequence, ks: &[f64]) -> Result<EvalReport, EvalError> {
    let confusion = frame_confusion(gt, pred)?;
    let g = frame_labels_to_segments(gt);
    let p = frame_labels_to_segments(pred);
    let segments = ks.iter().map(|&k| segment_match(&g, &p, k)).collect::<Result<_, _>>()?;
    Ok(EvalReport { confusion, segments })
}

impl EvalReport {
    pub fn frame_f1(&self, class: Class) -> f64 {
        frame_f1(&self.confusion, class)
    }

    /// `None` for an empty report.
    pub fn kappa(&self) -> Option<f64> {
        cohen_kappa(&self.confusion).ok()
    }

    pub fn outcome(&self, k: f64) -> Option<&SegmentOutcome> {
        self.segments.iter().find(|o| o.k == k)
    }

    pub fn segmental_f1(&self, k: f64, class: Class) -> Option<f64> {
        self.outcome(k).map(|o| segmental_f1(o, class))
    }

    /// Adds another report's counts (micro pooling).
    pub fn merge(&mut self, other: &EvalReport) {
        self.confusion.add(&other.confusion);
        assert_eq!(self.segments.len(), other.segments.len(), "reports use different thresholds");
        for (a, b) in self.segments.iter_mut().zip(&other.segments) {
            a.add(b);
        }
    }

    pub fn pooled<'a>(reports: impl IntoIterator<Item = &'a EvalReport>) -> Option<EvalReport> {
        let mut it = reports.into_iter();
        let mut acc = it.next()?.clone();
        for r in it {
            acc.merge(r);
        }
        Some(acc)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kappa = self.kappa().map_or("n/a".to_string(), |k| format!("{k:.3}"));
        writeln!(s, "frames {}", self.confusion.total()).unwrap();
        writeln!(s, "kappa {kappa}").unwrap();
        for c in Class::GESTURES {
            writeln!(s, "frame f1 {:<8} {:.3}", c.name(), self.frame_f1(c)).unwrap();
        }
        writeln!(s, "confusion (rows ground truth, columns prediction)").unwrap();
        writeln!(s, "{:>4}{:>10}{:>10}{:>10}", "", "N", "E", "D").unwrap();
        for c in Class::ALL {
            let r = &self.confusion.counts[c.index()];
            writeln!(s, "{:>4}{:>10}{:>10}{:>10}", c.short(), r[0], r[1], r[2]).unwrap();
        }
        for o in &self.segments {
            writeln!(s, "\nsegments k={}", o.k).unwrap();
            for c in Class::GESTURES {
                let n = o.counts(c);
                writeln!(
                    s,
                    "  {:<8} TP {:>5}  FP {:>5}  FN {:>5}  F1 {:.3}  as-{} {}",
                    c.name(),
                    n.tp,
                    n.fp,
                    n.fn_,
                    segmental_f1(o, c),
                    c.counterpart().name(),
                    o.confused(c)
                )
                .unwrap();
            }
        }
        s
    }

    /// One row per score: `level,k,class,tp,fp,fn,confused,score`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,k,class,tp,fp,fn,confused,score\n");
        for c in Class::GESTURES {
            let m = &self.confusion;
            writeln!(s, "frame,,{},{},{},{},,{}", c.name(), m.tp(c), m.fp(c), m.fn_(c), self.frame_f1(c)).unwrap();
        }
        let kappa = self.kappa().map_or(String::new(), |k| k.to_string());
        writeln!(s, "kappa,,all,,,,,{kappa}").unwrap();
        for o in &self.segments {
            for c in Class::GESTURES {
                let n = o.counts(c);
                let f1 = segmental_f1(o, c);
                writeln!(s, "segment,{},{},{},{},{},{},{f1}", o.k, c.name(), n.tp, n.fp, n.fn_, o.confused(c)).unwrap();
            }
        }
        s
    }
}

/// Per-meal score lines sorted by kappa, best first.
pub fn meal_table(rows: &[(String, EvalReport)]) -> String {
    let mut order: Vec<&(String, EvalReport)> = rows.iter().collect();
    order.sort_by(|a, b| {
        let ka = a.1.kappa().unwrap_or(f64::NEG_INFINITY);
        let kb = b.1.kappa().unwrap_or(f64::NEG_INFINITY);
        kb.total_cmp(&ka).then_with(|| a.0.cmp(&b.0))
    });
    let ks: Vec<f64> = rows.first().map(|r| r.1.segments.iter().map(|o| o.k).collect()).unwrap_or_default();
    let mut s = String::from("meal,kappa,frame_f1_eating,frame_f1_drinking");
    for k in &ks {
        write!(s, ",seg_f1_eating@{k},seg_f1_drinking@{k}").unwrap();
    }
    s.push('\n');
    for (id, r) in order {
        let kappa = r.kappa().map_or(String::new(), |k| format!("{k:.4}"));
        write!(s, "{id},{kappa},{:.4},{:.4}", r.frame_f1(Class::Eating), r.frame_f1(Class::Drinking)).unwrap();
        for o in &r.segments {
            write!(s, ",{:.4},{:.4}", segmental_f1(o, Class::Eating), segmental_f1(o, Class::Drinking)).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
