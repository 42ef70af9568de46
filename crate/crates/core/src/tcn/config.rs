use serde::{Deserialize, Serialize};

use super::TcnError;

/// Architecture hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_layers: u32,
    /// Leading layers that change spatial shape.
    pub n_variant: u32,
    pub n_kernels: u32,
    /// Cubic kernel edge over (range, doppler, time).
    pub kernel: u32,
    /// Kernel edge of the strided residual projection. 1 gives a pointwise
    /// projection; the default 3 mirrors the main branch (see README).
    pub residual_kernel: u32,
    pub causal: bool,
    pub dropout_rate: f64,
    pub n_classes: u32,
    pub in_range: u32,
    pub in_doppler: u32,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            n_layers: 9,
            n_variant: 4,
            n_kernels: 32,
            kernel: 3,
            residual_kernel: 3,
            causal: false,
            dropout_rate: 0.3,
            n_classes: 3,
            in_range: 32,
            in_doppler: 64,
        }
    }
}

impl ModelConfig {
    /// Spatial stride (range, doppler) of layer `l` (0-based).
    pub fn stride(&self, l: u32) -> (usize, usize) {
        if l >= self.n_variant {
            (1, 1)
        } else if l == 0 {
            (1, 2)
        } else {
            (2, 2)
        }
    }

    pub fn dilation(&self, l: u32) -> usize {
        1 << l
    }

    /// `(channels, range, doppler)` after each layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize, usize)> {
        let mut dims = (self.in_range as usize, self.in_doppler as usize);
        (0..self.n_layers)
            .map(|l| {
                let s = self.stride(l);
                dims = (dims.0.div_ceil(s.0), dims.1.div_ceil(s.1));
                (self.n_kernels as usize, dims.0, dims.1)
            })
            .collect()
    }

    /// Flattened per-frame feature size seen by the head.
    pub fn head_features(&self) -> usize {
        let (c, r, d) = self.layer_shapes().last().copied().unwrap_or((1, 0, 0));
        c * r * d
    }

    pub fn validate(&self) -> Result<(), TcnError> {
        let bad = |m: String| Err(TcnError::InvalidConfig(m));
        if self.n_layers < 1 {
            return bad("n_layers must be at least 1".into());
        }
        if self.n_variant > self.n_layers {
            return bad(format!("n_variant {} exceeds n_layers {}", self.n_variant, self.n_layers));
        }
        if self.n_layers > 20 {
            return bad(format!("n_layers {} is out of range", self.n_layers));
        }
        if self.kernel % 2 == 0 || self.residual_kernel % 2 == 0 || self.kernel == 0 {
            return bad("kernel sizes must be odd".into());
        }
        if self.residual_kernel > self.kernel {
            return bad("residual kernel larger than the main kernel".into());
        }
        if self.n_kernels == 0 || self.n_classes < 2 {
            return bad("need at least one kernel and two classes".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout rate {} not in [0, 1)", self.dropout_rate));
        }
        let (mut r, mut d) = (self.in_range as usize, self.in_doppler as usize);
        for l in 0..self.n_variant {
            let s = self.stride(l);
            if r % s.0 != 0 || d % s.1 != 0 || r / s.0 == 0 || d / s.1 == 0 {
                return bad(format!(
                    "input {}x{} does not survive {} halvings (layer {} sees {r}x{d})",
                    self.in_range,
                    self.in_doppler,
                    self.n_variant,
                    l + 1
                ));
            }
            r /= s.0;
            d /= s.1;
        }
        Ok(())
    }

    /// Frames of context one output frame reads as (past, future).
    pub fn context(&self) -> (usize, usize) {
        let span = (receptive_field(self.n_layers) - 1) as usize * (self.kernel as usize - 1) / 2;
        if self.causal {
            (span, 0)
        } else {
            (span / 2, span / 2)
        }
    }
}

/// Receptive field in frames of `n_layers` stacked kernel-3 layers with
/// doubling dilation.
pub fn receptive_field(n_layers: u32) -> u32 {
    (1u32 << (n_layers + 1)) - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub lambda_smooth: f64,
    pub gamma_trunc: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        LossParams { lambda_smooth: 0.15, gamma_trunc: 4.0 }
    }
}

impl LossParams {
    pub fn validate(&self) -> Result<(), TcnError> {
        if !(self.lambda_smooth >= 0.0) || !(self.gamma_trunc > 0.0) {
            return Err(TcnError::InvalidConfig(format!(
                "loss parameters out of range: lambda {} gamma {}",
                self.lambda_smooth, self.gamma_trunc
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub window_frames: u32,
    /// Windows whose gradients are averaged per Adam step.
    pub batch_size: u32,
    pub epochs: u32,
    /// Stop after this many epochs without a validation improvement.
    pub patience: Option<u32>,
    pub seed: u64,
    pub loss: LossParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 5e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            window_frames: 1000,
            batch_size: 4,
            epochs: 30,
            patience: None,
            seed: 0,
            loss: LossParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TcnError> {
        self.loss.validate()?;
        if self.window_frames == 0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(TcnError::InvalidConfig("window, batch and epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(TcnError::InvalidConfig(format!("learning rate {}", self.learning_rate)));
        }
        Ok(())
    }
}
