//! Numeric configuration: one flat `key = value` file, overridable per run.

use std::path::Path;

use anyhow::{bail, Context};
use eatradar::radar_dsp::RadarConfig;
use eatradar::tcn::{LossParams, ModelConfig, TrainConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub seed: u64,
    // radar
    pub fps: f32,
    pub n_virtual_antennas: usize,
    pub n_chirps: usize,
    pub n_samples: usize,
    pub range_resolution: f32,
    pub velocity_resolution: f32,
    pub crop_doppler: usize,
    pub crop_range: usize,
    // model
    pub n_layers: u32,
    pub n_variant: u32,
    pub n_kernels: u32,
    pub kernel: u32,
    pub residual_kernel: u32,
    pub causal: bool,
    pub dropout_rate: f64,
    // training
    pub learning_rate: f64,
    pub window_frames: u32,
    pub batch_size: u32,
    pub epochs: u32,
    pub patience: Option<u32>,
    pub lambda_smooth: f64,
    pub gamma_trunc: f64,
    // inference and evaluation
    pub max_chunk: usize,
    pub ks: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        let r = RadarConfig::default();
        let m = ModelConfig::default();
        let t = TrainConfig::default();
        Settings {
            seed: 0,
            fps: r.fps,
            n_virtual_antennas: r.n_virtual_antennas,
            n_chirps: r.n_chirps,
            n_samples: r.n_samples,
            range_resolution: r.range_resolution,
            velocity_resolution: r.velocity_resolution,
            crop_doppler: r.crop_doppler,
            crop_range: r.crop_range,
            n_layers: m.n_layers,
            n_variant: m.n_variant,
            n_kernels: m.n_kernels,
            kernel: m.kernel,
            residual_kernel: m.residual_kernel,
            causal: m.causal,
            dropout_rate: m.dropout_rate,
            learning_rate: t.learning_rate,
            window_frames: t.window_frames,
            batch_size: t.batch_size,
            epochs: t.epochs,
            patience: t.patience,
            lambda_smooth: t.loss.lambda_smooth,
            gamma_trunc: t.loss.gamma_trunc,
            max_chunk: eatradar::tcn::DEFAULT_MAX_CHUNK,
            ks: eatradar::eval::DEFAULT_KS.to_vec(),
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    // bare words fall back to strings
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl Settings {
    /// Defaults, then the optional file, then `key=value` overrides.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> anyhow::Result<Self> {
        let mut table = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                text.parse::<toml::Table>().with_context(|| format!("parsing {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            let Some((k, v)) = o.split_once('=') else {
                bail!("override {o:?} is not key=value");
            };
            table.insert(k.trim().to_string(), parse_value(v.trim()));
        }
        let s: Settings = toml::Value::Table(table).try_into().context("invalid configuration")?;
        Ok(s)
    }

    pub fn radar(&self, n_frames: usize) -> RadarConfig {
        RadarConfig {
            n_frames,
            n_virtual_antennas: self.n_virtual_antennas,
            n_chirps: self.n_chirps,
            n_samples: self.n_samples,
            fps: self.fps,
            range_resolution: self.range_resolution,
            velocity_resolution: self.velocity_resolution,
            crop_doppler: self.crop_doppler,
            crop_range: self.crop_range,
        }
    }

    pub fn model(&self) -> ModelConfig {
        ModelConfig {
            n_layers: self.n_layers,
            n_variant: self.n_variant,
            n_kernels: self.n_kernels,
            kernel: self.kernel,
            residual_kernel: self.residual_kernel,
            causal: self.causal,
            in_range: self.crop_range as u32,
            in_doppler: self.crop_doppler as u32,
            dropout_rate: self.dropout_rate,
            ..ModelConfig::default()
        }
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            window_frames: self.window_frames,
            batch_size: self.batch_size,
            epochs: self.epochs,
            patience: self.patience,
            seed: self.seed,
            loss: LossParams { lambda_smooth: self.lambda_smooth, gamma_trunc: self.gamma_trunc },
            ..TrainConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "epochs = 3\nlearning_rate = 0.001\n# comment\ncausal = true\n").unwrap();
        let s = Settings::load(Some(&path), &["epochs=7".into(), "ks = [0.5]".into()]).unwrap();
        assert_eq!(s.epochs, 7);
        assert_eq!(s.learning_rate, 0.001);
        assert!(s.causal);
        assert_eq!(s.ks, vec![0.5]);
        assert_eq!(s.window_frames, 1000);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_syntax() {
        assert!(Settings::load(None, &["epoch=3".into()]).is_err());
        assert!(Settings::load(None, &["epochs".into()]).is_err());
        assert!(Settings::load(None, &["epochs=many".into()]).is_err());
    }
}
