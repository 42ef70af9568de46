use super::RdCube;

/// `log(1 + x)` followed by a per-meal z-score. A constant meal maps to zeros.
pub fn normalize_for_model(rd: &RdCube) -> RdCube {
    let logged: Vec<f64> = rd.data.iter().map(|&v| (v as f64).ln_1p()).collect();
    let n = logged.len().max(1) as f64;
    let mean = logged.iter().sum::<f64>() / n;
    let var = logged.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let data = if std > 1e-12 * mean.abs().max(1.0) {
        logged.iter().map(|v| ((v - mean) / std) as f32).collect()
    } else {
        vec![0.0; rd.data.len()]
    };
    RdCube { data, ..rd.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_cube_is_zero() {
        let rd = RdCube::new(2, 3, 4, 25.0, vec![7.5; 24]).unwrap();
        assert!(normalize_for_model(&rd).data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardised_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let data: Vec<f32> = (0..4 * 8 * 6).map(|_| rng.gen_range(0.0..50.0f32).powi(2)).collect();
            let rd = RdCube::new(4, 8, 6, 25.0, data.clone()).unwrap();
            let out = normalize_for_model(&rd).data;
            let n = out.len() as f64;
            let mean = out.iter().map(|&v| v as f64).sum::<f64>() / n;
            let std = (out.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n).sqrt();
            assert!(mean.abs() < 1e-5, "mean {mean}");
            assert!((std - 1.0).abs() < 1e-3, "std {std}");
            for i in 0..data.len() - 1 {
                if data[i] < data[i + 1] {
                    assert!(out[i] <= out[i + 1]);
                }
            }
        }
    }
}
