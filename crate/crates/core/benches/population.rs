use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mobitrace::ingest::{ingest_str, write_cdr_csv, IngestOptions};
use mobitrace::kernel::{summarize_all, summarize_all_seq};
use mobitrace::synth::{gen_population, PopulationSpec};
use mobitrace::trajectory::build_trajectories;
use mobitrace::GeoPoint;
use rayon::ThreadPool;

fn spec(n_users: usize) -> PopulationSpec {
    PopulationSpec {
        n_users,
        commuter_fraction: 0.3,
        master_seed: 1,
        ..PopulationSpec::default()
    }
}

fn one_thread() -> ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()
}

fn summarize(c: &mut Criterion) {
    let mut g = c.benchmark_group("summarize");
    for n in [1_000, 10_000] {
        let trajectories = build_trajectories(&gen_population(&spec(n)).unwrap());
        g.bench_with_input(BenchmarkId::new("parallel", n), &trajectories, |b, t| {
            b.iter(|| summarize_all(t))
        });
        g.bench_with_input(BenchmarkId::new("sequential", n), &trajectories, |b, t| {
            b.iter(|| summarize_all_seq(t))
        });
    }
    g.finish();
}

fn generate(c: &mut Criterion) {
    let mut g = c.benchmark_group("synth");
    let s = spec(2_000);
    let pool = one_thread();
    g.bench_function("parallel", |b| b.iter(|| gen_population(&s).unwrap()));
    g.bench_function("one_thread", |b| b.iter(|| pool.install(|| gen_population(&s).unwrap())));
    g.finish();
}

fn ingest(c: &mut Criterion) {
    let mut g = c.benchmark_group("ingest");
    g.sample_size(20);
    let mut csv = Vec::new();
    write_cdr_csv(&mut csv, &gen_population(&spec(2_000)).unwrap(), GeoPoint::new(49.49, 0.12).unwrap())
        .unwrap();
    let text = String::from_utf8(csv).unwrap();
    let opts = IngestOptions::default();
    let pool = one_thread();
    g.bench_function("parallel", |b| b.iter(|| ingest_str(&text, &opts).unwrap()));
    g.bench_function("one_thread", |b| b.iter(|| pool.install(|| ingest_str(&text, &opts).unwrap())));
    g.finish();
}

criterion_group!(benches, summarize, generate, ingest);
criterion_main!(benches);
