use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dataset_io::{Class, LabelSequence};

/// Frame counts, rows ground truth and columns prediction, in class id order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn tp(&self, c: Class) -> u64 {
        self.counts[c.index()][c.index()]
    }

    pub fn fp(&self, c: Class) -> u64 {
        (0..3).filter(|&g| g != c.index()).map(|g| self.counts[g][c.index()]).sum()
    }

    pub fn fn_(&self, c: Class) -> u64 {
        (0..3).filter(|&p| p != c.index()).map(|p| self.counts[c.index()][p]).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten()) {
            *a += b;
        }
    }
}

pub fn frame_confusion(gt: &LabelSequence, pred: &LabelSequence) -> Result<ConfusionMatrix, EvalError> {
    if gt.len() != pred.len() {
        return Err(EvalError::LengthMismatch { gt: gt.len(), pred: pred.len() });
    }
    let mut m = ConfusionMatrix::default();
    for (g, p) in gt.labels.iter().zip(&pred.labels) {
        m.counts[g.index()][p.index()] += 1;
    }
    Ok(m)
}

/// `2tp / (2tp + fp + fn)`, 0 when nothing of the class was true or predicted.
pub fn frame_f1(conf: &ConfusionMatrix, class: Class) -> f64 {
    let tp = conf.tp(class) as f64;
    let den = 2.0 * tp + conf.fp(class) as f64 + conf.fn_(class) as f64;
    if den == 0.0 {
        0.0
    } else {
        2.0 * tp / den
    }
}

/// Chance-corrected agreement over all three classes.
pub fn cohen_kappa(conf: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = conf.total() as f64;
    if total == 0.0 {
        return Err(EvalError::EmptyMatrix);
    }
    let mut po = 0.0;
    let mut pe = 0.0;
    for c in Class::ALL {
        let tp = conf.tp(c) as f64;
        po += tp / total;
        pe += ((tp + conf.fp(c) as f64) / total) * ((tp + conf.fn_(c) as f64) / total);
    }
    if pe == 1.0 {
        return Ok(if po == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((po - pe) / (1.0 - pe))
}
