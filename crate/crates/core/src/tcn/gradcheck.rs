use super::config::LossParams;
use super::loss::loss_and_grad;
use super::model::Model;
use crate::dataset_io::Class;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Parameter tensor and index with the largest error.
    pub worst: (String, usize),
    pub n_params: usize,
}

fn loss(model: &Model<f64>, x: &[f64], frames: usize, targets: &[Class], params: &LossParams) -> f64 {
    let (logits, _) = model.run(x.to_vec(), frames, None, false);
    loss_and_grad(&logits, model.n_classes(), targets, params).expect("targets match frames").0
}

/// Compares back-propagated gradients of the total loss with central finite
/// differences for every parameter. Dropout is off.
///
/// The relative error of a pair is `|a − n| / max(|a|, |n|, 1e-8)`.
pub fn grad_check(
    model: &Model<f64>,
    x: &[f64],
    frames: usize,
    targets: &[Class],
    params: &LossParams,
    eps: f64,
) -> GradCheckReport {
    let mut grads = model.zeros_like();
    model.accumulate_gradient(x, frames, targets, params, None, &mut grads).expect("targets match frames");

    let names = model.param_names();
    let analytic: Vec<Vec<f64>> = grads.params().iter().map(|p| p.to_vec()).collect();
    let mut probe = model.clone();
    let mut worst = (0.0, (String::new(), 0));
    let mut n_params = 0;
    for (pi, a) in analytic.iter().enumerate() {
        for i in 0..a.len() {
            let orig = probe.params()[pi][i];
            probe.params_mut()[pi][i] = orig + eps;
            let up = loss(&probe, x, frames, targets, params);
            probe.params_mut()[pi][i] = orig - eps;
            let down = loss(&probe, x, frames, targets, params);
            probe.params_mut()[pi][i] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let rel = (a[i] - numeric).abs() / a[i].abs().max(numeric.abs()).max(1e-8);
            if rel > worst.0 {
                worst = (rel, (names[pi].clone(), i));
            }
            n_params += 1;
        }
    }
    GradCheckReport { max_rel_error: worst.0, worst: worst.1, n_params }
}
