use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{LossParams, ModelConfig};
use super::loss::loss_and_grad;
use super::conv::{conv_backward, conv_forward, ConvGeom};
use super::scalar::Scalar;
use super::TcnError;
use crate::dataset_io::Class;
use crate::radar_dsp::RdCube;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<T> {
    pub geom: ConvGeom,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> ConvLayer<T> {
    fn init(geom: ConvGeom, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (geom.patch_len() as f64).sqrt();
        let mut draw = |n: usize| -> Vec<T> {
            (0..n).map(|_| T::from_f64_lossy(rng.gen_range(-bound..bound))).collect()
        };
        let weight = draw(geom.weight_len());
        let bias = draw(geom.out_channels);
        ConvLayer { geom, weight, bias }
    }

    fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> ConvLayer<U> {
        ConvLayer {
            geom: self.geom,
            weight: self.weight.iter().map(|&v| f(v)).collect(),
            bias: self.bias.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Dilated convolution, ReLU, dropout, plus the (possibly projected) input.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualLayer<T> {
    pub conv: ConvLayer<T>,
    pub projection: Option<ConvLayer<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub layers: Vec<ResidualLayer<T>>,
    /// `[class][feature]`, applied independently to every frame.
    pub head_weight: Vec<T>,
    pub head_bias: Vec<T>,
}

/// Per-frame class probabilities, `[frame][class]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSequence<T> {
    pub n_frames: usize,
    pub n_classes: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> ProbSequence<T> {
    pub fn row(&self, t: usize) -> &[T] {
        &self.data[t * self.n_classes..(t + 1) * self.n_classes]
    }

    /// Arg-max class id per frame; ties go to the lower id.
    pub fn argmax(&self) -> Vec<u8> {
        (0..self.n_frames)
            .map(|t| {
                let row = self.row(t);
                let mut best = 0;
                for (c, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = c;
                    }
                }
                best as u8
            })
            .collect()
    }

    pub fn from_logits(logits: &[T], n_classes: usize) -> Self {
        let mut data = logits.to_vec();
        for row in data.chunks_mut(n_classes) {
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            row.iter_mut().for_each(|v| *v = (*v - max).exp());
            let sum: T = row.iter().copied().sum();
            row.iter_mut().for_each(|v| *v = *v / sum);
        }
        ProbSequence { n_frames: logits.len() / n_classes, n_classes, data }
    }
}

pub fn build_model<T: Scalar>(cfg: &ModelConfig, seed: u64) -> Result<Model<T>, TcnError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_shape = (1usize, cfg.in_range as usize, cfg.in_doppler as usize);
    let mut layers = Vec::with_capacity(cfg.n_layers as usize);
    for l in 0..cfg.n_layers {
        let (c_in, r, d) = in_shape;
        let c_out = cfg.n_kernels as usize;
        let stride = cfg.stride(l);
        let dil = cfg.dilation(l);
        let geom = ConvGeom::new(c_in, c_out, cfg.kernel as usize, stride, dil, cfg.causal, (r, d));
        let conv = ConvLayer::init(geom, &mut rng);
        let projection = (c_in != c_out || stride != (1, 1)).then(|| {
            let pg = ConvGeom::new(c_in, c_out, cfg.residual_kernel as usize, stride, dil, cfg.causal, (r, d));
            ConvLayer::init(pg, &mut rng)
        });
        in_shape = (c_out, geom.out_range, geom.out_doppler);
        layers.push(ResidualLayer { conv, projection });
    }
    let features = in_shape.0 * in_shape.1 * in_shape.2;
    let bound = 1.0 / (features as f64).sqrt();
    let classes = cfg.n_classes as usize;
    let mut draw =
        |n: usize| -> Vec<T> { (0..n).map(|_| T::from_f64_lossy(rng.gen_range(-bound..bound))).collect() };
    let head_weight = draw(classes * features);
    let head_bias = draw(classes);
    Ok(Model { config: cfg.clone(), layers, head_weight, head_bias })
}

/// Activations kept from a training forward pass.
pub(crate) struct Tape<T> {
    frames: usize,
    inputs: Vec<Vec<T>>,
    pre_act: Vec<Vec<T>>,
    masks: Vec<Option<Vec<bool>>>,
    features: Vec<T>,
}

impl<T: Scalar> Model<T> {
    pub fn n_classes(&self) -> usize {
        self.config.n_classes as usize
    }

    pub fn features(&self) -> usize {
        self.head_weight.len() / self.n_classes()
    }

    /// Parameter tensors in checkpoint order: per layer conv weight, conv
    /// bias, projection weight, projection bias; then head weight and bias.
    pub fn params(&self) -> Vec<&[T]> {
        let mut v: Vec<&[T]> = Vec::new();
        for l in &self.layers {
            v.push(&l.conv.weight);
            v.push(&l.conv.bias);
            if let Some(p) = &l.projection {
                v.push(&p.weight);
                v.push(&p.bias);
            }
        }
        v.push(&self.head_weight);
        v.push(&self.head_bias);
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        let mut v: Vec<&mut [T]> = Vec::new();
        for l in &mut self.layers {
            v.push(&mut l.conv.weight);
            v.push(&mut l.conv.bias);
            if let Some(p) = &mut l.projection {
                v.push(&mut p.weight);
                v.push(&mut p.bias);
            }
        }
        v.push(&mut self.head_weight);
        v.push(&mut self.head_bias);
        v
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            v.push(format!("layer{}.conv.weight", i + 1));
            v.push(format!("layer{}.conv.bias", i + 1));
            if l.projection.is_some() {
                v.push(format!("layer{}.residual.weight", i + 1));
                v.push(format!("layer{}.residual.bias", i + 1));
            }
        }
        v.push("head.weight".into());
        v.push("head.bias".into());
        v
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    /// Same architecture with every parameter set to zero; used as a
    /// gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        self.cast_with(|_| T::zero())
    }

    pub fn cast<U: Scalar>(&self) -> Model<U> {
        self.cast_with(|v| U::from_f64_lossy(v.to_f64_lossy()))
    }

    fn cast_with<U: Scalar>(&self, f: impl Fn(T) -> U + Copy) -> Model<U> {
        Model {
            config: self.config.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| ResidualLayer { conv: l.conv.map(f), projection: l.projection.as_ref().map(|p| p.map(f)) })
                .collect(),
            head_weight: self.head_weight.iter().map(|&v| f(v)).collect(),
            head_bias: self.head_bias.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Logits `[frame][class]` for a model-layout input `[1][range][doppler][frame]`.
    ///
    /// With `dropout` set, masks are drawn from the generator and the tape
    /// needed by [`Model::backward`] is returned.
    pub(crate) fn run(
        &self,
        x: Vec<T>,
        frames: usize,
        mut dropout: Option<&mut ChaCha8Rng>,
        keep_tape: bool,
    ) -> (Vec<T>, Option<Tape<T>>) {
        let rate = self.config.dropout_rate;
        let scale = T::from_f64_lossy(1.0 / (1.0 - rate));
        let mut tape = keep_tape.then(|| Tape {
            frames,
            inputs: Vec::new(),
            pre_act: Vec::new(),
            masks: Vec::new(),
            features: Vec::new(),
        });
        let mut x = x;
        for layer in &self.layers {
            let g = &layer.conv.geom;
            let mut a = vec![T::zero(); g.out_len(frames)];
            conv_forward(g, &layer.conv.weight, &layer.conv.bias, &x, frames, &mut a);
            let mask = match dropout.as_deref_mut() {
                Some(rng) if rate > 0.0 => Some((0..a.len()).map(|_| rng.gen::<f64>() >= rate).collect::<Vec<_>>()),
                _ => None,
            };
            let mut y = match &layer.projection {
                Some(p) => {
                    let mut r = vec![T::zero(); p.geom.out_len(frames)];
                    conv_forward(&p.geom, &p.weight, &p.bias, &x, frames, &mut r);
                    r
                }
                None if tape.is_some() => x.clone(),
                None => std::mem::take(&mut x),
            };
            match &mask {
                Some(m) => {
                    for ((y, &a), &keep) in y.iter_mut().zip(&a).zip(m) {
                        if keep && a > T::zero() {
                            *y += a * scale;
                        }
                    }
                }
                None => {
                    for (y, &a) in y.iter_mut().zip(&a) {
                        if a > T::zero() {
                            *y += a;
                        }
                    }
                }
            }
            if let Some(t) = tape.as_mut() {
                t.inputs.push(std::mem::take(&mut x));
                t.pre_act.push(a);
                t.masks.push(mask);
            }
            x = y;
        }
        let logits = self.head(&x, frames);
        if let Some(t) = tape.as_mut() {
            t.features = x;
        }
        (logits, tape)
    }

    fn head(&self, features: &[T], frames: usize) -> Vec<T> {
        let c = self.n_classes();
        let f = self.features();
        let mut ct = vec![T::zero(); c * frames];
        T::gemm(c, f, frames, &self.head_weight, (f, 1), features, (frames, 1), T::zero(), &mut ct, (frames, 1));
        let mut out = vec![T::zero(); c * frames];
        for k in 0..c {
            for t in 0..frames {
                out[t * c + k] = ct[k * frames + t] + self.head_bias[k];
            }
        }
        out
    }

    /// Accumulates parameter gradients of a scalar loss into `grads`, given
    /// its gradient with respect to the logits `[frame][class]`.
    pub(crate) fn backward(&self, tape: &Tape<T>, dlogits: &[T], grads: &mut Model<T>) {
        let frames = tape.frames;
        let c = self.n_classes();
        let f = self.features();
        let mut dl = vec![T::zero(); c * frames];
        for t in 0..frames {
            for k in 0..c {
                dl[k * frames + t] = dlogits[t * c + k];
            }
        }
        T::gemm(c, frames, f, &dl, (frames, 1), &tape.features, (1, frames), T::one(), &mut grads.head_weight, (f, 1));
        for k in 0..c {
            grads.head_bias[k] += dl[k * frames..(k + 1) * frames].iter().copied().sum::<T>();
        }
        let mut gy = vec![T::zero(); f * frames];
        T::gemm(f, c, frames, &self.head_weight, (1, f), &dl, (frames, 1), T::zero(), &mut gy, (frames, 1));

        let scale = T::from_f64_lossy(1.0 / (1.0 - self.config.dropout_rate));
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let x = &tape.inputs[l];
            let a = &tape.pre_act[l];
            let gl = &mut grads.layers[l];
            let mut gx = match (&layer.projection, &mut gl.projection) {
                (Some(p), Some(gp)) => {
                    let mut gx = vec![T::zero(); x.len()];
                    let gin = (l > 0).then_some(gx.as_mut_slice());
                    conv_backward(&p.geom, &p.weight, x, frames, &gy, &mut gp.weight, &mut gp.bias, gin);
                    gx
                }
                _ => gy.clone(),
            };
            let ga: Vec<T> = match &tape.masks[l] {
                Some(m) => gy
                    .iter()
                    .zip(a)
                    .zip(m)
                    .map(|((&g, &a), &keep)| if keep && a > T::zero() { g * scale } else { T::zero() })
                    .collect(),
                None => gy.iter().zip(a).map(|(&g, &a)| if a > T::zero() { g } else { T::zero() }).collect(),
            };
            let gin = (l > 0).then_some(gx.as_mut_slice());
            conv_backward(&layer.conv.geom, &layer.conv.weight, x, frames, &ga, &mut gl.conv.weight, &mut gl.conv.bias, gin);
            gy = gx;
        }
    }

    /// Forward and backward pass over one window in model layout. Adds the
    /// parameter gradients of the total loss to `grads` and returns the loss.
    pub fn accumulate_gradient(
        &self,
        x: &[T],
        frames: usize,
        targets: &[Class],
        params: &LossParams,
        dropout: Option<&mut ChaCha8Rng>,
        grads: &mut Model<T>,
    ) -> Result<f64, TcnError> {
        let (logits, tape) = self.run(x.to_vec(), frames, dropout, true);
        let (loss, dlogits) = loss_and_grad(&logits, self.n_classes(), targets, params)?;
        if !loss.is_finite() {
            return Err(TcnError::NonFinite(format!("loss {loss}")));
        }
        self.backward(&tape.expect("tape requested"), &dlogits, grads);
        Ok(loss)
    }

    /// Model-layout input `[1][range][doppler][frame]` for frames
    /// `start..start + len` of a normalized RD cube.
    pub fn input_from(&self, cube: &RdCube, start: usize, len: usize) -> Result<Vec<T>, TcnError> {
        let (nr, nd) = (self.config.in_range as usize, self.config.in_doppler as usize);
        if cube.n_range != nr || cube.n_doppler != nd {
            return Err(TcnError::InputShape { expected: (nd, nr), actual: (cube.n_doppler, cube.n_range) });
        }
        assert!(start + len <= cube.n_frames);
        let mut x = vec![T::zero(); nr * nd * len];
        for t in 0..len {
            let frame = cube.frame(start + t);
            for d in 0..nd {
                for r in 0..nr {
                    let v = frame[d * nr + r];
                    if !v.is_finite() {
                        return Err(TcnError::NonFinite(format!("input frame {} bin ({d}, {r})", start + t)));
                    }
                    x[(r * nd + d) * len + t] = T::from_f64_lossy(v as f64);
                }
            }
        }
        Ok(x)
    }

    /// Output shape `(channels, range, doppler)` after each layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize, usize)> {
        self.layers
            .iter()
            .map(|l| (l.conv.geom.out_channels, l.conv.geom.out_range, l.conv.geom.out_doppler))
            .collect()
    }
}

/// Inference-mode forward pass over a normalized RD cube window.
pub fn forward<T: Scalar>(model: &Model<T>, window: &RdCube) -> Result<ProbSequence<T>, TcnError> {
    if window.n_frames == 0 {
        return Err(TcnError::Empty("window has no frames".into()));
    }
    let x = model.input_from(window, 0, window.n_frames)?;
    let (logits, _) = model.run(x, window.n_frames, None, false);
    Ok(ProbSequence::from_logits(&logits, model.n_classes()))
}
