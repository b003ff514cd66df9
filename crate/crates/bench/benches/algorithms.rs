use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use termtraj::mixture::{em_fit, Conditioner, EmOptions};
use termtraj::preprocess::{dtw_distance, pchip_resample};
use termtraj::rng::seeded;
use termtraj::{EnuPoint, GaussianComponent, MixtureModel, SegmentKind};

fn dtw(c: &mut Criterion) {
    let mut rng = seeded(1);
    let mut g = c.benchmark_group("dtw");
    for len in [20, 60, 200] {
        let mut seq = || (0..len).map(|_| [rng.random_range(-1e4..1e4), rng.random_range(-1e4..1e4), rng.random_range(0.0..3e3)]).collect::<Vec<_>>();
        let (a, b) = (seq(), seq());
        g.bench_with_input(BenchmarkId::from_parameter(len), &len, |bch, _| {
            bch.iter(|| dtw_distance(black_box(&a), black_box(&b)).unwrap())
        });
    }
    g.finish();
}

fn em(c: &mut Criterion) {
    let mut rng = seeded(2);
    let data = DMatrix::from_fn(1000, 50, |i, _| rng.random_range(-1.0..1.0) + (i % 3) as f64 * 2.0);
    let mut g = c.benchmark_group("em");
    g.sample_size(10);
    for k in [1, 3] {
        g.bench_with_input(BenchmarkId::new("m1000_n50", k), &k, |bch, &k| {
            bch.iter(|| em_fit(&data, k, SegmentKind::FinalApproach, &EmOptions::default(), &mut seeded(3)).unwrap())
        });
    }
    g.finish();
}

fn pchip(c: &mut Criterion) {
    let mut rng = seeded(4);
    let mut t = 0.0;
    let traj: Vec<EnuPoint> = (0..500)
        .map(|_| {
            t += rng.random_range(3.0..7.0);
            EnuPoint::new(t, rng.random_range(-1e4..1e4), rng.random_range(-1e4..1e4), rng.random_range(0.0..3e3))
        })
        .collect();
    c.bench_function("pchip_resample/500_to_60", |bch| bch.iter(|| pchip_resample(black_box(&traj), 60).unwrap()));
}

fn condition(c: &mut Criterion) {
    // final-approach sized model: T = 40, 10 conditioned points
    let mut rng = seeded(5);
    let n = 3 * 40 + 2;
    let comps = (0..3)
        .map(|_| {
            let a = DMatrix::from_fn(n, 20, |_, _| rng.random_range(-1.0..1.0));
            let mean = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
            let mut comp = GaussianComponent::from_covariance(1.0 / 3.0, mean, &(&a * a.transpose()));
            comp.noise_var = 0.1;
            comp
        })
        .collect();
    let model = MixtureModel::new(comps, SegmentKind::FinalApproach).unwrap();
    let observed: Vec<usize> = (2..32).collect();
    let values: Vec<f64> = (0..observed.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
    c.bench_function("conditioner build", |bch| {
        bch.iter(|| Conditioner::with_observation_noise(black_box(&model), &observed, 1.0).unwrap())
    });
    let cond = Conditioner::with_observation_noise(&model, &observed, 1.0).unwrap();
    c.bench_function("condition and sample", |bch| {
        let mut r = seeded(6);
        bch.iter(|| cond.condition(black_box(&values)).unwrap().sample(&mut r))
    });
}

criterion_group!(benches, dtw, em, pchip, condition);
criterion_main!(benches);
