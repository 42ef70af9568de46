use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{receptive_field, TrainConfig};
use super::infer::{predict_probs, DEFAULT_MAX_CHUNK};
use super::loss::loss_total;
use super::model::Model;
use super::scalar::Scalar;
use super::TcnError;
use crate::dataset_io::LabelSequence;
use crate::radar_dsp::RdCube;

/// A normalized RD cube with its per-frame labels.
#[derive(Debug, Clone)]
pub struct Meal {
    pub id: String,
    pub cube: RdCube,
    pub labels: LabelSequence,
}

impl Meal {
    pub fn new(id: impl Into<String>, cube: RdCube, labels: LabelSequence) -> Result<Self, TcnError> {
        if cube.n_frames != labels.len() {
            return Err(TcnError::LengthMismatch { expected: cube.n_frames, actual: labels.len() });
        }
        Ok(Meal { id: id.into(), cube, labels })
    }
}

pub struct Adam<T> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(model: &Model<T>, cfg: &TrainConfig) -> Self {
        let zeros = || model.params().iter().map(|p| vec![T::zero(); p.len()]).collect();
        Adam { learning_rate: cfg.learning_rate, beta1: cfg.beta1, beta2: cfg.beta2, eps: cfg.eps, step: 0, m: zeros(), v: zeros() }
    }

    /// One update with gradients scaled by `grad_scale`.
    pub fn step(&mut self, model: &mut Model<T>, grads: &Model<T>, grad_scale: f64) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let f = T::from_f64_lossy;
        let (b1, b2, lr, eps, s) = (f(self.beta1), f(self.beta2), f(self.learning_rate), f(self.eps), f(grad_scale));
        let (c1, c2) = (f(c1), f(c2));
        for (((p, g), m), v) in model.params_mut().into_iter().zip(grads.params()).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                let gi = g[i] * s;
                m[i] = b1 * m[i] + (T::one() - b1) * gi;
                v[i] = b2 * v[i] + (T::one() - b2) * gi * gi;
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: u32,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_frame_acc: Option<f64>,
}

pub struct TrainedModel {
    pub model: Model<f32>,
    /// Epoch whose weights were kept (1-based).
    pub best_epoch: u32,
    pub history: Vec<EpochRecord>,
    pub warnings: Vec<String>,
}

/// Frame-weighted mean loss and frame accuracy of `model` over whole meals.
pub fn evaluate_loss<T: Scalar>(model: &Model<T>, meals: &[Meal], cfg: &TrainConfig) -> Result<(f64, f64), TcnError> {
    let (mut loss, mut correct, mut frames) = (0.0, 0usize, 0usize);
    for meal in meals {
        let probs = predict_probs(model, &meal.cube, DEFAULT_MAX_CHUNK)?;
        loss += loss_total(&probs, &meal.labels.labels, &cfg.loss)? * meal.labels.len() as f64;
        correct += probs.argmax().iter().zip(&meal.labels.labels).filter(|(p, c)| **p == c.id()).count();
        frames += meal.labels.len();
    }
    if frames == 0 {
        return Err(TcnError::Empty("no frames to evaluate".into()));
    }
    Ok((loss / frames as f64, correct as f64 / frames as f64))
}

fn epoch_windows(meals: &[Meal], window: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for (i, m) in meals.iter().enumerate() {
        let n = m.cube.n_frames;
        if n <= window {
            v.push((i, 0, n));
            continue;
        }
        for _ in 0..n.div_ceil(window) {
            v.push((i, rng.gen_range(0..=n - window), window));
        }
    }
    v.shuffle(rng);
    v
}

/// Trains on `train` meals, keeping the weights of the epoch with the lowest
/// validation loss (the last epoch when `val` is empty).
pub fn train(model: Model<f32>, train: &[Meal], val: &[Meal], cfg: &TrainConfig) -> Result<TrainedModel, TcnError> {
    train_observed(model, train, val, cfg, |_| {})
}

pub fn train_observed(
    mut model: Model<f32>,
    train: &[Meal],
    val: &[Meal],
    cfg: &TrainConfig,
    mut observer: impl FnMut(&EpochRecord),
) -> Result<TrainedModel, TcnError> {
    cfg.validate()?;
    if train.iter().all(|m| m.cube.n_frames == 0) {
        return Err(TcnError::Empty("empty training set".into()));
    }
    let mut warnings = Vec::new();
    let rf = receptive_field(model.config.n_layers);
    if cfg.window_frames < rf {
        warnings.push(format!("window of {} frames is shorter than the receptive field ({rf})", cfg.window_frames));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(&model, cfg);
    let mut grads = model.zeros_like();
    let mut best: Option<(f64, u32, Model<f32>)> = None;
    let mut history = Vec::new();
    let mut window_counter = 0u64;

    for epoch in 1..=cfg.epochs {
        let windows = epoch_windows(train, cfg.window_frames as usize, &mut rng);
        let mut loss_sum = 0.0;
        for batch in windows.chunks(cfg.batch_size as usize) {
            for g in grads.params_mut() {
                g.fill(0.0);
            }
            for &(mi, start, len) in batch {
                let meal = &train[mi];
                let x = model.input_from(&meal.cube, start, len)?;
                let mut drop_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_d409);
                drop_rng.set_stream(window_counter);
                window_counter += 1;
                let targets = &meal.labels.labels[start..start + len];
                let loss = model
                    .accumulate_gradient(&x, len, targets, &cfg.loss, Some(&mut drop_rng), &mut grads)
                    .map_err(|e| {
                        TcnError::NonFinite(format!("epoch {epoch}, meal {} frames {start}..{}: {e}", meal.id, start + len))
                    })?;
                loss_sum += loss;
            }
            adam.step(&mut model, &grads, 1.0 / batch.len() as f64);
        }
        if !model.is_finite() {
            return Err(TcnError::NonFinite(format!("weights after epoch {epoch}")));
        }
        let train_loss = loss_sum / windows.len() as f64;
        let (val_loss, val_acc) = if val.is_empty() {
            (None, None)
        } else {
            let (l, a) = evaluate_loss(&model, val, cfg)?;
            (Some(l), Some(a))
        };
        let rec = EpochRecord { epoch, train_loss, val_loss, val_frame_acc: val_acc };
        observer(&rec);
        history.push(rec);

        let score = val_loss.unwrap_or(f64::NEG_INFINITY);
        if best.as_ref().map_or(true, |(b, _, _)| score < *b || val_loss.is_none()) {
            best = Some((score, epoch, model.clone()));
        }
        if let (Some(p), Some((_, be, _))) = (cfg.patience, &best) {
            if epoch - be >= p {
                break;
            }
        }
    }
    let (_, best_epoch, model) = best.expect("at least one epoch");
    Ok(TrainedModel { model, best_epoch, history, warnings })
}

pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<(), TcnError> {
    let io = |e| TcnError::io(path, e);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x}"));
    writeln!(f, "epoch,train_loss,val_loss,val_frame_acc").map_err(io)?;
    for r in history {
        writeln!(f, "{},{},{},{}", r.epoch, r.train_loss, opt(r.val_loss), opt(r.val_frame_acc)).map_err(io)?;
    }
    f.flush().map_err(io)
}
