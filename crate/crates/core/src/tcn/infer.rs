use super::model::{Model, ProbSequence};
use super::scalar::Scalar;
use super::TcnError;
use crate::dataset_io::LabelSequence;
use crate::radar_dsp::RdCube;

/// Longest meal run in one forward pass by default.
pub const DEFAULT_MAX_CHUNK: usize = 4096;

/// Per-frame probabilities over a whole meal. Meals longer than `max_chunk`
/// are split into chunks that carry enough context on each side for every
/// kept frame to see its full receptive field, so the result matches a
/// single pass exactly.
pub fn predict_probs<T: Scalar>(model: &Model<T>, meal: &RdCube, max_chunk: usize) -> Result<ProbSequence<T>, TcnError> {
    let n = meal.n_frames;
    let classes = model.n_classes();
    if n == 0 {
        return Ok(ProbSequence { n_frames: 0, n_classes: classes, data: Vec::new() });
    }
    let (past, future) = model.config.context();
    if n <= max_chunk {
        let x = model.input_from(meal, 0, n)?;
        let (logits, _) = model.run(x, n, None, false);
        return Ok(ProbSequence::from_logits(&logits, classes));
    }
    if max_chunk <= past + future {
        return Err(TcnError::InvalidConfig(format!(
            "chunk of {max_chunk} frames leaves no room beside {} frames of context",
            past + future
        )));
    }
    let core = max_chunk - past - future;
    let mut data = Vec::with_capacity(n * classes);
    let mut s = 0;
    while s < n {
        let e = (s + core).min(n);
        let lo = s.saturating_sub(past);
        let hi = (e + future).min(n);
        let x = model.input_from(meal, lo, hi - lo)?;
        let (logits, _) = model.run(x, hi - lo, None, false);
        data.extend_from_slice(&logits[(s - lo) * classes..(e - lo) * classes]);
        s = e;
    }
    Ok(ProbSequence::from_logits(&data, classes))
}

/// Frame-wise arg-max labels for a normalized meal.
pub fn predict_meal<T: Scalar>(model: &Model<T>, meal: &RdCube, max_chunk: usize) -> Result<LabelSequence, TcnError> {
    let probs = predict_probs(model, meal, max_chunk)?;
    LabelSequence::from_ids(&probs.argmax(), meal.fps)
        .ok_or_else(|| TcnError::InvalidConfig("model has classes beyond other/eating/drinking".into()))
}
