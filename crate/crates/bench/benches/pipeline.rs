use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use cellmatch_bench::{grid_frames, robot_frames};
use cellmatch_core::label::ingest;
use cellmatch_core::{Analysis, EngineConfig, Pin};

fn bench_ingest(c: &mut Criterion) {
    let cfg = EngineConfig::default().ingest();
    let (a, _) = grid_frames(1024, 7);
    c.bench_function("ingest/grid-1024", |bench| bench.iter(|| ingest(black_box(&a), &cfg).unwrap()));
}

fn bench_pipeline(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for (name, (a, b)) in [("robot", robot_frames()), ("grid-1024", grid_frames(1024, 7))] {
        group.bench_function(name, |bench| {
            bench.iter_batched(
                || (a.clone(), b.clone()),
                |(a, b)| Analysis::run(a, b, &cfg, &[]).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn bench_rematch(c: &mut Criterion) {
    let (a, b) = grid_frames(1024, 7);
    let analysis = Analysis::run(a, b, &EngineConfig::default(), &[]).unwrap();
    let pins: Vec<Pin> = analysis.correspondence().pairs.iter().take(3).map(|p| Pin { a: p.a, b: p.b }).collect();
    c.bench_function("rematch/grid-1024-3-pins", |bench| {
        bench.iter(|| analysis.matcher().run(black_box(&pins)).unwrap())
    });
}

criterion_group!(benches, bench_ingest, bench_pipeline, bench_rematch);
criterion_main!(benches);
