use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fockline::evolution::evolve_amplitudes;
use fockline::experiments::{build_steering, sweep_c_with, SteeringConfig};
use fockline::fock::{Amplitudes, ModeRegistry, OccupationVector};
use fockline::measurement::sample_events_with;
use fockline::optics::ModeUnitary;
use fockline::{Complex64, Exec};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn sweep(c: &mut Criterion) {
    let cfg = SteeringConfig::default();
    let grid: Vec<f64> = (0..180).map(f64::from).collect();
    let mut group = c.benchmark_group("sweep_c_180");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sweep_c_with(black_box(&cfg), &grid, exec).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let state = build_steering(&SteeringConfig::default()).unwrap().evolve().unwrap();
    let mut group = c.benchmark_group("sample_1e5");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sample_events_with(black_box(&state), 100_000, 7, exec))
        });
    }
    group.finish();
}

fn evolution(c: &mut Criterion) {
    let reg = Arc::new(ModeRegistry::new(["a", "b", "c", "d", "e", "f"], &[0]).unwrap());
    let u = ModeUnitary::haar_random(reg.clone(), &mut ChaCha8Rng::seed_from_u64(3));
    let mut terms = Amplitudes::new();
    for i in 0..reg.len() {
        for j in i..reg.len() {
            for k in j..reg.len() {
                let w = Complex64::new(1.0 + i as f64, (j * k) as f64 * 0.1);
                terms.insert(OccupationVector::from_photons([i, j, k]), w);
            }
        }
    }
    let mut group = c.benchmark_group("evolve_3ph_12modes");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| evolve_amplitudes(black_box(&terms), &u, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, sampling, evolution);
criterion_main!(benches);
