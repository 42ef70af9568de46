use serde::{Deserialize, Serialize};

use super::DspError;

/// Radar frame geometry and bin resolutions.
///
/// Everything downstream is expressed in bins: range bin `j` is `j * range_resolution`
/// metres and centred Doppler bin `n_chirps / 2 + m` is `m * velocity_resolution` m/s,
/// positive meaning the target approaches the radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    pub n_frames: usize,
    pub n_virtual_antennas: usize,
    pub n_chirps: usize,
    pub n_samples: usize,
    pub fps: f32,
    /// metres per range bin
    pub range_resolution: f32,
    /// m/s per Doppler bin
    pub velocity_resolution: f32,
    pub crop_doppler: usize,
    pub crop_range: usize,
}

impl Default for RadarConfig {
    fn default() -> Self {
        RadarConfig {
            n_frames: 1,
            n_virtual_antennas: 4,
            n_chirps: 128,
            n_samples: 128,
            fps: 25.0,
            range_resolution: 0.04,
            velocity_resolution: 0.04,
            crop_doppler: 64,
            crop_range: 32,
        }
    }
}

impl RadarConfig {
    pub fn with_frames(self, n_frames: usize) -> Self {
        RadarConfig { n_frames, ..self }
    }

    pub fn validate(&self) -> Result<(), DspError> {
        let bad = |m: String| Err(DspError::InvalidConfig(m));
        if !self.n_chirps.is_power_of_two() || self.n_chirps < 2 {
            return bad(format!("n_chirps {} must be a power of two >= 2", self.n_chirps));
        }
        if !self.n_samples.is_power_of_two() {
            return bad(format!("n_samples {} must be a power of two", self.n_samples));
        }
        if self.n_virtual_antennas == 0 {
            return bad("n_virtual_antennas must be positive".into());
        }
        if self.crop_doppler == 0 || self.crop_range == 0 {
            return bad("crop sizes must be positive".into());
        }
        if self.crop_doppler > self.n_chirps || self.crop_range > self.n_samples {
            return Err(DspError::CropTooLarge {
                crop_doppler: self.crop_doppler,
                crop_range: self.crop_range,
                n_doppler: self.n_chirps,
                n_range: self.n_samples,
            });
        }
        if self.crop_doppler % 2 != 0 {
            return bad(format!("crop_doppler {} must be even", self.crop_doppler));
        }
        for (name, v) in [
            ("fps", self.fps),
            ("range_resolution", self.range_resolution),
            ("velocity_resolution", self.velocity_resolution),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} {v} must be positive"));
            }
        }
        Ok(())
    }

    pub fn n_range_bins(&self) -> usize {
        self.n_samples
    }

    pub fn n_doppler_bins(&self) -> usize {
        self.n_chirps
    }

    pub fn raw_shape(&self) -> [usize; 4] {
        [self.n_frames, self.n_virtual_antennas, self.n_chirps, self.n_samples]
    }

    pub fn raw_frame_len(&self) -> usize {
        self.n_virtual_antennas * self.n_chirps * self.n_samples
    }

    pub fn rd_frame_len(&self) -> usize {
        self.crop_doppler * self.crop_range
    }

    /// Largest |velocity| kept by the crop.
    pub fn max_velocity(&self) -> f32 {
        (self.crop_doppler / 2) as f32 * self.velocity_resolution
    }

    /// Range covered by the crop, exclusive.
    pub fn max_range(&self) -> f32 {
        self.crop_range as f32 * self.range_resolution
    }

    /// Cropped `(doppler, range)` bin of an on-grid target.
    pub fn cropped_bin(&self, range_m: f64, velocity_mps: f64) -> (i64, i64) {
        let d = (velocity_mps / self.velocity_resolution as f64).round() as i64;
        let r = (range_m / self.range_resolution as f64).round() as i64;
        ((self.crop_doppler / 2) as i64 + d, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_published_roi() {
        let c = RadarConfig::default();
        c.validate().unwrap();
        assert!((c.max_velocity() - 1.28).abs() < 1e-6);
        assert!((c.max_range() - 1.28).abs() < 1e-6);
        assert_eq!(c.cropped_bin(0.40, -0.32), (24, 10));
    }

    #[test]
    fn rejects_bad_geometry() {
        let c = RadarConfig::default();
        assert!(RadarConfig { n_chirps: 100, ..c }.validate().is_err());
        assert!(RadarConfig { n_samples: 96, ..c }.validate().is_err());
        assert!(matches!(
            RadarConfig { crop_range: 256, ..c }.validate(),
            Err(DspError::CropTooLarge { .. })
        ));
        assert!(RadarConfig { range_resolution: 0.0, ..c }.validate().is_err());
    }
}
