use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use somqe::{classify, SomLattice, TrainConfig};
use somqe_bench::gray_series;

fn bmu(c: &mut Criterion) {
    let series = gray_series(64, 2);
    let lattice = SomLattice::fit(4, 4, &series[0], &TrainConfig::default()).unwrap();
    let x = [0.6];
    c.bench_function("bmu_4x4_gray", |b| {
        b.iter(|| lattice.bmu(black_box(&x)).unwrap())
    });
}

fn train(c: &mut Criterion) {
    let series = gray_series(512, 1);
    let config = TrainConfig::default();
    let mut group = c.benchmark_group("train");
    group.sample_size(20);
    group.bench_function("default_512x512", |b| {
        b.iter(|| SomLattice::fit(4, 4, black_box(&series[0]), &config).unwrap())
    });
    group.finish();
}

fn quantization_error(c: &mut Criterion) {
    let mut group = c.benchmark_group("quantization_error");
    group.sample_size(20);
    for side in [128, 256, 512, 724] {
        let series = gray_series(side, 2);
        let lattice = SomLattice::fit(4, 4, &series[0], &TrainConfig::default()).unwrap();
        group.throughput(Throughput::Elements((side * side) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(side), &series[1], |b, img| {
            b.iter(|| lattice.quantization_error(img).unwrap())
        });
    }
    group.finish();
}

fn score_twenty(c: &mut Criterion) {
    let series = gray_series(512, 20);
    let lattice = SomLattice::fit(4, 4, &series[0], &TrainConfig::default()).unwrap();
    let mut group = c.benchmark_group("score_series");
    group.sample_size(10);
    group.bench_function("20x512x512", |b| {
        b.iter(|| classify::score_series(&lattice, &series, &series[0].id).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bmu, train, quantization_error, score_twenty);
criterion_main!(benches);
