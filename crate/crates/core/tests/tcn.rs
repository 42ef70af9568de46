use eatradar::radar_dsp::RdCube;
use eatradar::tcn::*;
use eatradar::{Class, LabelSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_cube(frames: usize, doppler: usize, range: usize, seed: u64) -> RdCube {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..frames * doppler * range).map(|_| rng.sample::<f32, _>(StandardNormal)).collect();
    RdCube::new(frames, doppler, range, 25.0, data).unwrap()
}

fn small_config() -> ModelConfig {
    ModelConfig { n_layers: 3, n_variant: 2, n_kernels: 4, in_range: 8, in_doppler: 8, ..Default::default() }
}

fn perturbed(cube: &RdCube, t: usize) -> RdCube {
    let mut c = cube.clone();
    let len = c.frame_len();
    for v in &mut c.data[t * len..(t + 1) * len] {
        *v += 0.5;
    }
    c
}

fn changed_frames(a: &ProbSequence<f32>, b: &ProbSequence<f32>) -> Vec<usize> {
    (0..a.n_frames).filter(|&t| a.row(t) != b.row(t)).collect()
}

#[test]
fn default_architecture() {
    let model = build_model::<f32>(&ModelConfig::default(), 0).unwrap();
    let shapes = model.layer_shapes();
    assert_eq!(&shapes[..4], &[(32, 32, 32), (32, 16, 16), (32, 8, 8), (32, 4, 4)]);
    assert_eq!(shapes.len(), 9);
    assert!(shapes[4..].iter().all(|&s| s == (32, 4, 4)));
    assert_eq!(model.features(), 512);
    let n = model.param_count() as f64;
    assert!((n / 300_000.0 - 1.0).abs() < 0.05, "{n} parameters");
}

#[test]
fn pointwise_projection_is_lighter() {
    let cfg = ModelConfig { residual_kernel: 1, ..Default::default() };
    let a = build_model::<f32>(&cfg, 0).unwrap().param_count();
    let b = build_model::<f32>(&ModelConfig::default(), 0).unwrap().param_count();
    // four projections shrink from 27 taps to one
    assert_eq!(b - a, 26 * 32 * (1 + 32 * 3));
}

#[test]
fn rows_sum_to_one_and_inference_is_deterministic() {
    let model = build_model::<f32>(&small_config(), 3).unwrap();
    let cube = random_cube(40, 8, 8, 1);
    let p = forward(&model, &cube).unwrap();
    assert_eq!(p.n_frames, 40);
    for t in 0..40 {
        let s: f32 = p.row(t).iter().sum();
        assert!((s - 1.0).abs() < 1e-5);
    }
    assert_eq!(p, forward(&model, &cube).unwrap());
}

#[test]
fn rejects_bad_input() {
    let model = build_model::<f32>(&small_config(), 3).unwrap();
    assert!(matches!(forward(&model, &random_cube(5, 8, 4, 1)), Err(TcnError::InputShape { .. })));
    let mut cube = random_cube(5, 8, 8, 1);
    cube.data[17] = f32::NAN;
    assert!(matches!(forward(&model, &cube), Err(TcnError::NonFinite(_))));
}

#[test]
fn default_model_locality() {
    let model = build_model::<f32>(&ModelConfig::default(), 1).unwrap();
    let cube = random_cube(1400, 64, 32, 2);
    let base = forward(&model, &cube).unwrap();
    let t = 700;
    let moved = forward(&model, &perturbed(&cube, t)).unwrap();
    let changed = changed_frames(&base, &moved);
    assert!(changed.iter().all(|&u| u.abs_diff(t) <= 511), "{:?}", changed.first());
    assert!(changed.contains(&t));
    assert!(!changed.is_empty());
}

#[test]
fn causal_model_never_looks_ahead() {
    let cfg = ModelConfig { causal: true, ..small_config() };
    let model = build_model::<f32>(&cfg, 5).unwrap();
    let cube = random_cube(60, 8, 8, 3);
    let base = forward(&model, &cube).unwrap();
    for t in [0, 20, 59] {
        let changed = changed_frames(&base, &forward(&model, &perturbed(&cube, t)).unwrap());
        assert!(changed.iter().all(|&u| u >= t && u - t <= 14), "{t}: {changed:?}");
        assert!(changed.contains(&t));
    }
}

#[test]
fn chunked_prediction_is_exact() {
    let model = build_model::<f32>(&small_config(), 7).unwrap();
    let cube = random_cube(97, 8, 8, 4);
    let single = predict_probs(&model, &cube, 1000).unwrap();
    for chunk in [15, 16, 31, 50] {
        assert_eq!(predict_probs(&model, &cube, chunk).unwrap(), single, "chunk {chunk}");
    }
    assert!(predict_probs(&model, &cube, 14).is_err());
    let labels = predict_meal(&model, &cube, 20).unwrap();
    assert_eq!(labels.len(), 97);
}

#[test]
fn meal_shorter_than_receptive_field() {
    let model = build_model::<f32>(&ModelConfig::default(), 0).unwrap();
    let labels = predict_meal(&model, &random_cube(12, 64, 32, 5), DEFAULT_MAX_CHUNK).unwrap();
    assert_eq!(labels.len(), 12);
}

fn grad_setup() -> (Model<f64>, Vec<f64>, Vec<Class>) {
    let cfg = ModelConfig { dropout_rate: 0.0, ..small_config() };
    let model = build_model::<f64>(&cfg, 11).unwrap();
    let cube = random_cube(16, 8, 8, 6);
    let x = model.input_from(&cube, 0, 16).unwrap();
    let targets = (0..16).map(|t| Class::ALL[(t / 5) % 3]).collect();
    (model, x, targets)
}

#[test]
fn gradients_match_finite_differences() {
    let (model, x, targets) = grad_setup();
    for params in [LossParams::default(), LossParams { lambda_smooth: 0.0, ..Default::default() }] {
        let r = grad_check(&model, &x, 16, &targets, &params, 1e-5);
        assert_eq!(r.n_params, model.param_count());
        assert!(r.max_rel_error < 1e-4, "{r:?}");
    }
}

#[test]
fn dead_branch_has_zero_gradient() {
    let (mut model, x, targets) = grad_setup();
    let dead = &mut model.layers[2].conv;
    dead.weight.fill(0.0);
    dead.bias.fill(-1.0);
    let r = grad_check(&model, &x, 16, &targets, &LossParams::default(), 1e-5);
    assert!(r.max_rel_error < 1e-4, "{r:?}");
    let g = gradient_of(&model, &x, &targets);
    assert!(g.layers[2].conv.weight.iter().all(|&v| v == 0.0));
    assert!(g.layers[2].conv.bias.iter().all(|&v| v == 0.0));
    assert!(g.layers[1].conv.weight.iter().any(|&v| v != 0.0));
}

fn gradient_of(model: &Model<f64>, x: &[f64], targets: &[Class]) -> Model<f64> {
    let mut grads = model.zeros_like();
    model.accumulate_gradient(x, targets.len(), targets, &LossParams::default(), None, &mut grads).unwrap();
    grads
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    let model = build_model::<f32>(&ModelConfig { causal: true, ..small_config() }, 9).unwrap();
    write_checkpoint(&path, &model).unwrap();
    assert_eq!(read_checkpoint(&path).unwrap(), model);

    let mut bytes = std::fs::read(&path).unwrap();
    bytes.pop();
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_checkpoint(&path), Err(TcnError::Checkpoint(_))));
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    assert!(read_checkpoint(&path).is_err());
}

fn toy_meal(frames: usize, seed: u64) -> Meal {
    // class-dependent offset in one Doppler band makes the task learnable
    let mut cube = random_cube(frames, 8, 8, seed);
    let ids: Vec<u8> = (0..frames).map(|t| [0, 1, 0, 2][(t / 17) % 4]).collect();
    for (t, &id) in ids.iter().enumerate() {
        let len = cube.frame_len();
        for v in &mut cube.data[t * len + 8 * id as usize..t * len + 8 * id as usize + 8] {
            *v += 2.5;
        }
    }
    Meal::new(format!("toy{seed}"), cube, LabelSequence::from_ids(&ids, 25.0).unwrap()).unwrap()
}

fn toy_train_config() -> TrainConfig {
    TrainConfig { window_frames: 64, batch_size: 2, epochs: 3, learning_rate: 5e-3, seed: 4, ..Default::default() }
}

#[test]
fn training_is_deterministic() {
    let train_set = vec![toy_meal(150, 1), toy_meal(120, 2)];
    let val = vec![toy_meal(80, 3)];
    let run = || {
        let model = build_model::<f32>(&small_config(), 2).unwrap();
        train(model, &train_set, &val, &toy_train_config()).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.model, b.model);
    assert_eq!(a.history, b.history);
    assert_eq!(a.history.len(), 3);
    assert!(a.history.iter().all(|r| r.val_loss.is_some()));
}

#[test]
fn overfits_a_single_meal() {
    let meal = toy_meal(200, 5);
    let model = build_model::<f32>(&small_config(), 2).unwrap();
    let cfg = TrainConfig { epochs: 200, window_frames: 200, batch_size: 1, ..toy_train_config() };
    let trained = train(model, std::slice::from_ref(&meal), &[], &cfg).unwrap();
    assert_eq!(trained.best_epoch, 200);
    let pred = predict_meal(&trained.model, &meal.cube, DEFAULT_MAX_CHUNK).unwrap();
    let acc = pred.labels.iter().zip(&meal.labels.labels).filter(|(a, b)| a == b).count() as f64 / 200.0;
    assert!(acc > 0.99, "training accuracy {acc}");
    let h = &trained.history;
    assert!(h.last().unwrap().train_loss < h[0].train_loss);
}

#[test]
fn training_rejects_empty_set() {
    let model = build_model::<f32>(&small_config(), 2).unwrap();
    assert!(matches!(train(model, &[], &[], &toy_train_config()), Err(TcnError::Empty(_))));
}

#[test]
fn history_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let h = vec![
        EpochRecord { epoch: 1, train_loss: 1.5, val_loss: Some(1.25), val_frame_acc: Some(0.5) },
        EpochRecord { epoch: 2, train_loss: 1.0, val_loss: None, val_frame_acc: None },
    ];
    write_history(&path, &h).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "epoch,train_loss,val_loss,val_frame_acc\n1,1.5,1.25,0.5\n2,1,nan,nan\n");
}
