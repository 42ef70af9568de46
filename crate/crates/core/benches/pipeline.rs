//! Hot paths timed on the rayon pool and on a single thread.
//!
//! With the default `parallel` feature every workload is measured twice:
//! on the global rayon pool and inside a one-thread pool. Built with
//! `--no-default-features` the crate has no rayon at all and each workload
//! is measured once, labelled `sequential`.

use criterion::{criterion_group, criterion_main, Criterion};
use eatradar::dataset_io::Class;
use eatradar::radar_dsp::{process_frames, DspPlan, RadarConfig, RdCube};
use eatradar::scene_sim::{meal_synthesizer, sample_meal_script, StatsProfile, SynthOptions, Synthesizer};
use eatradar::tcn::{build_model, forward, LossParams, Model, ModelConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FRAMES: usize = 64;

fn synthesizer() -> Synthesizer {
    let script = sample_meal_script(&StatsProfile::default_profile().with_duration(10.0), 1);
    let cfg = RadarConfig::default().with_frames(script.n_frames(25.0));
    meal_synthesizer(&script, &cfg, 1, SynthOptions::default()).unwrap()
}

fn rd_cube(frames: usize) -> RdCube {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = (0..frames * 2048).map(|_| rng.gen_range(-1.0..1.0)).collect();
    RdCube::new(frames, 64, 32, 25.0, data).unwrap()
}

/// Runs `f` under every available execution mode.
fn modes(c: &mut Criterion, group: &str, mut f: impl FnMut() + Send) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        let threads = rayon::current_num_threads();
        g.bench_function(criterion::BenchmarkId::new("rayon", threads), |b| b.iter(&mut f));
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        g.bench_function(criterion::BenchmarkId::new("rayon", 1), |b| single.install(|| b.iter(&mut f)));
    }
    #[cfg(not(feature = "parallel"))]
    g.bench_function("sequential", |b| b.iter(&mut f));
    g.finish();
}

fn dsp(c: &mut Criterion) {
    let synth = synthesizer();
    let raw = synth.synth_frames(0, FRAMES);
    let plan = DspPlan::new(synth.config()).unwrap();
    modes(c, "dsp_64_frames", || {
        std::hint::black_box(process_frames(&plan, &raw).unwrap());
    });
}

fn synthesis(c: &mut Criterion) {
    let synth = synthesizer();
    modes(c, "synth_64_frames", || {
        std::hint::black_box(synth.synth_frames(0, FRAMES));
    });
}

fn inference(c: &mut Criterion) {
    let model: Model<f32> = build_model(&ModelConfig::default(), 0).unwrap();
    let cube = rd_cube(250);
    modes(c, "tcn_forward_250_frames", || {
        std::hint::black_box(forward(&model, &cube).unwrap());
    });
}

fn gradient(c: &mut Criterion) {
    let model: Model<f32> = build_model(&ModelConfig::default(), 0).unwrap();
    let cube = rd_cube(250);
    let x = model.input_from(&cube, 0, 250).unwrap();
    let targets: Vec<Class> = (0..250).map(|t| Class::ALL[(t / 40) % 3]).collect();
    let mut grads = model.zeros_like();
    modes(c, "tcn_gradient_250_frames", || {
        model.accumulate_gradient(&x, 250, &targets, &LossParams::default(), None, &mut grads).unwrap();
    });
}

criterion_group!(benches, dsp, synthesis, inference, gradient);
criterion_main!(benches);
