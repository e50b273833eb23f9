use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tmqi_bench::scene_pair;
use tmqi_core::eval::krcc;
use tmqi_core::io::{read_radiance_hdr, write_radiance_hdr};
use tmqi_core::*;

fn fidelity(c: &mut Criterion) {
    let mut group = c.benchmark_group("fidelity");
    let p = FidelityParams::default();
    for size in [64, 256] {
        let (hdr, ldr) = scene_pair(size);
        let x = RangeAlignment::Linear.align(&luminance(&hdr));
        let y = luminance(&ldr);
        group.bench_with_input(BenchmarkId::new("score", size), &size, |b, _| {
            b.iter(|| structural_fidelity(black_box(&x), black_box(&y), &p).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fd_gradient", size), &size, |b, _| {
            b.iter(|| fidelity_gradient(&x, &y, &p, GradientMethod::FiniteDifference).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("analytic_gradient", size),
            &size,
            |b, _| b.iter(|| fidelity_gradient(&x, &y, &p, GradientMethod::Analytic).unwrap()),
        );
    }
    group.finish();
}

fn phase(c: &mut Criterion) {
    let mut group = c.benchmark_group("lwmpa");
    let p = PhaseParams::default();
    for size in [64, 256, 250] {
        let (_, ldr) = scene_pair(size);
        let y = luminance(&ldr);
        group.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, _| {
            b.iter(|| lwmpa(black_box(&y), &p).unwrap())
        });
    }
    group.finish();
}

fn full_index(c: &mut Criterion) {
    let (hdr, ldr) = scene_pair(256);
    let p = TmqiParams::default();
    c.bench_function("tmqi3/256", |b| {
        b.iter(|| tmqi3(black_box(&hdr), black_box(&ldr), &p).unwrap())
    });
}

fn rank_correlation(c: &mut Criterion) {
    let a: Vec<f64> = (0..10_000).map(|i| ((i * 7919) % 10_007) as f64).collect();
    let b: Vec<f64> = (0..10_000)
        .map(|i| ((i * 104_729) % 10_009) as f64)
        .collect();
    c.bench_function("krcc/10000", |bench| {
        bench.iter(|| krcc(black_box(&a), black_box(&b)).unwrap())
    });
}

fn rgbe(c: &mut Criterion) {
    let (hdr, _) = scene_pair(256);
    let bytes = write_radiance_hdr(&hdr).unwrap();
    c.bench_function("rgbe/encode_256", |b| {
        b.iter(|| write_radiance_hdr(black_box(&hdr)).unwrap())
    });
    c.bench_function("rgbe/decode_256", |b| {
        b.iter(|| read_radiance_hdr(black_box(&bytes)).unwrap())
    });
}

criterion_group!(benches, fidelity, phase, full_index, rank_correlation, rgbe);
criterion_main!(benches);
