//! Independent reference implementations used by several test targets.
#![allow(dead_code)]

use eatradar::dataset_io::{frame_labels_to_segments, Class, LabelSequence, Segment, SegmentSet};
use eatradar::eval::{ClassCounts, SegmentOutcome};
use rand::Rng;

/// Random label sequence built from runs of `1..=max_run` frames.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, max_run: usize) -> LabelSequence {
    let mut labels = Vec::with_capacity(n);
    while labels.len() < n {
        let class = Class::ALL[rng.gen_range(0..3)];
        let run = rng.gen_range(1..=max_run).min(n - labels.len());
        labels.extend(std::iter::repeat(class).take(run));
    }
    LabelSequence::new(labels, 25.0)
}

pub fn segments(seq: &LabelSequence) -> SegmentSet {
    frame_labels_to_segments(seq)
}

fn overlap(a: &Segment, b: &Segment) -> u32 {
    (a.start.max(b.start)..a.end.min(b.end)).len() as u32
}

fn iou(a: &Segment, b: &Segment) -> f64 {
    let i = overlap(a, b) as f64;
    i / ((a.end - a.start) as f64 + (b.end - b.start) as f64 - i)
}

/// Ordering key of a candidate pair; bigger is preferred.
type Key = (f64, i64, i64);

fn better(a: &[Key], b: &[Key]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x.partial_cmp(y) == Some(std::cmp::Ordering::Greater);
        }
    }
    a.len() > b.len()
}

/// Enumerates every one-to-one matching of overlapping pairs and keeps the
/// one whose pair keys, sorted best first, are lexicographically largest.
fn best_matching(gt: &[Segment], pred: &[Segment]) -> Vec<(usize, usize)> {
    fn go(
        gi: usize,
        gt: &[Segment],
        pred: &[Segment],
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        best: &mut (Vec<Key>, Vec<(usize, usize)>),
    ) {
        if gi == gt.len() {
            let mut keys: Vec<Key> = cur
                .iter()
                .map(|&(g, p)| (iou(&gt[g], &pred[p]), -(pred[p].start as i64), -(gt[g].start as i64)))
                .collect();
            keys.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if better(&keys, &best.0) {
                *best = (keys, cur.clone());
            }
            return;
        }
        go(gi + 1, gt, pred, used, cur, best);
        for pi in 0..pred.len() {
            if !used[pi] && overlap(&gt[gi], &pred[pi]) > 0 {
                used[pi] = true;
                cur.push((gi, pi));
                go(gi + 1, gt, pred, used, cur, best);
                cur.pop();
                used[pi] = false;
            }
        }
    }
    let mut best = (Vec::new(), Vec::new());
    go(0, gt, pred, &mut vec![false; pred.len()], &mut Vec::new(), &mut best);
    best.1
}

/// Reference segment scoring by exhaustive matching.
pub fn brute_force_outcome(gt: &SegmentSet, pred: &SegmentSet, k: f64) -> SegmentOutcome {
    let mut out = SegmentOutcome::empty(k);
    for class in [Class::Eating, Class::Drinking] {
        let g: Vec<Segment> = gt.segments.iter().filter(|s| s.class == class).copied().collect();
        let p: Vec<Segment> = pred.segments.iter().filter(|s| s.class == class).copied().collect();
        let pairs = best_matching(&g, &p);
        let mut c = ClassCounts::default();
        for &(gi, pi) in &pairs {
            if iou(&g[gi], &p[pi]) >= k {
                c.tp += 1;
            } else if g[gi].end - g[gi].start < p[pi].end - p[pi].start {
                c.fp += 1;
            } else {
                c.fn_ += 1;
            }
        }
        c.fp += (p.len() - pairs.len()) as u64;
        c.fn_ += (g.len() - pairs.len()) as u64;
        let other = if class == Class::Eating { Class::Drinking } else { Class::Eating };
        let confused = g
            .iter()
            .filter(|s| {
                let touching = |cls: Class| pred.segments.iter().any(|q| q.class == cls && overlap(s, q) > 0);
                !touching(class) && touching(other)
            })
            .count() as u64;
        if class == Class::Eating {
            out.eating = c;
            out.eating_as_drinking = confused;
        } else {
            out.drinking = c;
            out.drinking_as_eating = confused;
        }
    }
    out
}

/// Cohen's kappa straight from the two label vectors.
pub fn kappa_oracle(gt: &[Class], pred: &[Class]) -> f64 {
    let n = gt.len() as f64;
    let agree = gt.iter().zip(pred).filter(|(a, b)| a == b).count() as f64 / n;
    let chance: f64 = Class::ALL
        .iter()
        .map(|c| {
            let a = gt.iter().filter(|x| *x == c).count() as f64 / n;
            let b = pred.iter().filter(|x| *x == c).count() as f64 / n;
            a * b
        })
        .sum();
    if chance == 1.0 {
        return if agree == 1.0 { 1.0 } else { 0.0 };
    }
    (agree - chance) / (1.0 - chance)
}

/// Mean negative log-likelihood of the targets, probabilities floored at 1e-8.
pub fn ce_oracle(probs: &[Vec<f64>], targets: &[usize]) -> f64 {
    let total: f64 = probs.iter().zip(targets).map(|(p, &y)| -(p[y].max(1e-8)).ln()).sum();
    total / probs.len() as f64
}

/// Truncated squared difference of log-probabilities between neighbouring frames.
pub fn tmse_oracle(probs: &[Vec<f64>], gamma: f64) -> f64 {
    let t = probs.len();
    if t < 2 {
        return 0.0;
    }
    let c = probs[0].len();
    let mut total = 0.0;
    for i in 1..t {
        for j in 0..c {
            let d = (probs[i][j].max(1e-8).ln() - probs[i - 1][j].max(1e-8).ln()).abs();
            total += d.min(gamma).powi(2);
        }
    }
    total / (t as f64 * c as f64)
}
