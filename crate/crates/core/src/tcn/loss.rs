//! Frame-wise cross-entropy plus truncated smoothing loss.

use super::config::LossParams;
use super::model::ProbSequence;
use super::scalar::Scalar;
use super::TcnError;
use crate::dataset_io::Class;

/// Probabilities are floored here before taking logs.
pub const PROB_FLOOR: f64 = 1e-8;

fn log_floor<T: Scalar>(p: T) -> f64 {
    p.to_f64_lossy().max(PROB_FLOOR).ln()
}

fn check_targets<T>(probs: &ProbSequence<T>, targets: &[Class]) -> Result<(), TcnError> {
    if probs.n_frames != targets.len() {
        return Err(TcnError::LengthMismatch { expected: probs.n_frames, actual: targets.len() });
    }
    if let Some(c) = targets.iter().find(|c| c.index() >= probs.n_classes) {
        return Err(TcnError::InvalidConfig(format!("target class {c:?} outside the model's classes")));
    }
    Ok(())
}

/// Mean over frames of the cross-entropy against one-hot targets.
pub fn loss_cls<T: Scalar>(probs: &ProbSequence<T>, targets: &[Class]) -> Result<f64, TcnError> {
    check_targets(probs, targets)?;
    if targets.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = targets.iter().enumerate().map(|(t, c)| -log_floor(probs.row(t)[c.index()])).sum();
    Ok(sum / targets.len() as f64)
}

/// Truncated squared change of log-probabilities between consecutive
/// frames, averaged over frames and classes. Zero for fewer than 2 frames.
pub fn loss_tmse<T: Scalar>(probs: &ProbSequence<T>, gamma: f64) -> f64 {
    let (n, c) = (probs.n_frames, probs.n_classes);
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for t in 1..n {
        for k in 0..c {
            let d = (log_floor(probs.row(t)[k]) - log_floor(probs.row(t - 1)[k])).abs().min(gamma);
            sum += d * d;
        }
    }
    sum / (n * c) as f64
}

pub fn loss_total<T: Scalar>(probs: &ProbSequence<T>, targets: &[Class], params: &LossParams) -> Result<f64, TcnError> {
    Ok(loss_cls(probs, targets)? + params.lambda_smooth * loss_tmse(probs, params.gamma_trunc))
}

/// Total loss of `logits` (`[frame][class]`) and its gradient with respect
/// to them. Log-probabilities come from a stable log-softmax; frames where
/// the floor is active pass no gradient through it.
pub fn loss_and_grad<T: Scalar>(
    logits: &[T],
    n_classes: usize,
    targets: &[Class],
    params: &LossParams,
) -> Result<(f64, Vec<T>), TcnError> {
    let n = logits.len() / n_classes;
    if n != targets.len() {
        return Err(TcnError::LengthMismatch { expected: n, actual: targets.len() });
    }
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let floor = PROB_FLOOR.ln();
    let mut logp = vec![0.0f64; logits.len()];
    let mut prob = vec![0.0f64; logits.len()];
    for t in 0..n {
        let row = &logits[t * n_classes..(t + 1) * n_classes];
        let max = row.iter().map(|v| v.to_f64_lossy()).fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v.to_f64_lossy() - max).exp()).sum::<f64>().ln();
        for k in 0..n_classes {
            let lp = row[k].to_f64_lossy() - lse;
            prob[t * n_classes + k] = lp.exp();
            logp[t * n_classes + k] = lp;
        }
    }
    if !logp.iter().all(|v| v.is_finite()) {
        return Err(TcnError::NonFinite("logits".into()));
    }
    let s = |i: usize| logp[i].max(floor);

    // d loss / d (floored log-prob)
    let mut ds = vec![0.0f64; logits.len()];
    let mut cls = 0.0;
    for (t, c) in targets.iter().enumerate() {
        let i = t * n_classes + c.index();
        cls -= s(i);
        ds[i] -= 1.0 / n as f64;
    }
    cls /= n as f64;

    let mut tmse = 0.0;
    let w = params.lambda_smooth / (n * n_classes) as f64;
    for t in 1..n {
        for k in 0..n_classes {
            let (i, j) = (t * n_classes + k, (t - 1) * n_classes + k);
            let d = s(i) - s(j);
            if d.abs() <= params.gamma_trunc {
                tmse += d * d;
                ds[i] += 2.0 * w * d;
                ds[j] -= 2.0 * w * d;
            } else {
                tmse += params.gamma_trunc * params.gamma_trunc;
            }
        }
    }
    let loss = cls + params.lambda_smooth * tmse / (n * n_classes) as f64;

    let mut grad = vec![T::zero(); logits.len()];
    for t in 0..n {
        let r = t * n_classes..(t + 1) * n_classes;
        for i in r.clone() {
            if logp[i] < floor {
                ds[i] = 0.0;
            }
        }
        let total: f64 = ds[r.clone()].iter().sum();
        for i in r {
            grad[i] = T::from_f64_lossy(ds[i] - prob[i] * total);
        }
    }
    Ok((loss, grad))
}
