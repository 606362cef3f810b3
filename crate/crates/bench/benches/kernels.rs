use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairlab_core::data::{generate, JointSpec};
use fairlab_core::metrics::{evaluate, PredictionSet, Utopia};
use fairlab_core::models::Variant;
use fairlab_core::nn::{MlpParams, MlpSpec};
use fairlab_core::train::{Batch, DiscBatch, TrainConfig, Trainer};

fn mlp(c: &mut Criterion) {
    let spec = MlpSpec::new(300, &[300], 300).with_dropout(0.0);
    let net = MlpParams::init(&spec, 1).unwrap();
    let ds = generate(&JointSpec::moji_default(), 256, 2).unwrap();
    let x = fairlab_core::Matrix::from_vec(
        256,
        300,
        (0..256 * 300)
            .map(|i| ds.x.data()[i % ds.x.data().len()])
            .collect(),
    )
    .unwrap();
    c.bench_function("mlp_forward_256x300", |b| {
        b.iter(|| net.forward(black_box(&x), None).unwrap())
    });
    let (out, trace) = net.forward(&x, None).unwrap();
    c.bench_function("mlp_backward_256x300", |b| {
        b.iter(|| net.backward(black_box(&trace), &out).unwrap())
    });
}

fn adversarial_step(c: &mut Criterion) {
    let ds = generate(&JointSpec::moji_default(), 512, 3).unwrap();
    let rows: Vec<usize> = (0..ds.len()).collect();
    let batch = Batch::from_rows(&ds, &rows);
    let disc = DiscBatch::from_rows(&ds, &rows, None);
    let mut group = c.benchmark_group("adversarial_step_512");
    for variant in [
        Variant::Standard,
        Variant::Adv,
        Variant::AAdv,
        Variant::DAdv,
    ] {
        let cfg = TrainConfig {
            variant,
            lambda: 1.0,
            hidden: 64,
            ..Default::default()
        };
        let mut t = Trainer::new(&cfg, ds.dim(), 2, 2).unwrap();
        let disc = variant.is_adversarial().then_some(&disc);
        group.bench_with_input(BenchmarkId::from_parameter(variant), &variant, |b, _| {
            b.iter(|| t.adversarial_step(black_box(&batch), disc).unwrap())
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let n = 100_000;
    let y: Vec<usize> = (0..n).map(|i| i % 8).collect();
    let yhat: Vec<usize> = (0..n).map(|i| (i * 7 / 5) % 8).collect();
    let g: Vec<Option<usize>> = (0..n).map(|i| (i % 5 != 0).then_some(i % 4)).collect();
    let preds = PredictionSet::new(yhat, y, g, 8, 4).unwrap();
    c.bench_function("evaluate_100k", |b| {
        b.iter(|| evaluate(black_box(&preds), Utopia::default()).unwrap())
    });
}

criterion_group!(benches, mlp, adversarial_step, metrics);
criterion_main!(benches);
