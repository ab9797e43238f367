use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use roth_core::constructions::random_set;
use roth_core::fourier::{convolve, count_3aps_set};
use roth_core::spectrum::{energy_2m, spectrum_at};
use roth_core::{CountMode, CyclicGroup, FourierTable, RealFunction};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fourier");
    for n in [1009usize, 4095, 65537] {
        let set = random_set(CyclicGroup::new(n).unwrap(), 0.1, 7).unwrap();
        group.bench_with_input(BenchmarkId::new("table", n), &set, |b, s| b.iter(|| FourierTable::of_set(black_box(s))));
        let f = RealFunction::indicator(&set);
        group.bench_with_input(BenchmarkId::new("convolve", n), &f, |b, f| b.iter(|| convolve(black_box(f), f).unwrap()));
        group.bench_with_input(BenchmarkId::new("count_fourier", n), &set, |b, s| {
            b.iter(|| count_3aps_set(black_box(s), CountMode::Fourier).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("spectrum", n), &set, |b, s| b.iter(|| spectrum_at(black_box(s), 0.2).unwrap()));
    }
    group.finish();
}

fn counting(c: &mut Criterion) {
    let mut group = c.benchmark_group("counting");
    let set = random_set(CyclicGroup::new(1009).unwrap(), 0.1, 7).unwrap();
    group.bench_function("count_direct_1009", |b| b.iter(|| count_3aps_set(black_box(&set), CountMode::Direct).unwrap()));
    let small = random_set(CyclicGroup::new(101).unwrap(), 0.1, 3).unwrap();
    for mode in [CountMode::Direct, CountMode::Fourier] {
        group.bench_with_input(BenchmarkId::new("energy_m2", format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| energy_2m(black_box(&small), 2, m).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, counting);
criterion_main!(benches);
