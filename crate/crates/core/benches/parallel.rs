//! Parallel-vs-sequential comparison for the data-parallel inner loops:
//! per-filter D-EER evaluation, batch SRM extraction, and per-tree forest
//! training. Build with the default `parallel` feature to compare rayon
//! against the always-available sequential twins.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use fusebench_core::imgfeat::srm::{srm_residuals_batch, srm_residuals_batch_seq};
use fusebench_core::imgfeat::{ImagePlane, RgbImage};
use fusebench_core::learners::forest::{train_forest, train_forest_seq};
use fusebench_core::learners::FeatureVector;
use fusebench_core::metrics::{average_deer, average_deer_seq};
use fusebench_core::score::{Label, ScoreRecord, ScoreTable};
use fusebench_core::seeds;
use rand::Rng;

fn score_table(filters: usize, per_filter: usize) -> ScoreTable {
    let mut rng = seeds::substream(1, "bench-scores", 0);
    let mut records = Vec::new();
    for i in 0..per_filter * 2 {
        records.push(ScoreRecord {
            sample_id: format!("bf{i}"),
            source: "s".into(),
            filter: "bonafide".into(),
            label: Label::BonaFide,
            score: rng.gen(),
        });
    }
    for f in 0..filters {
        for i in 0..per_filter {
            records.push(ScoreRecord {
                sample_id: format!("f{f}_{i}"),
                source: "s".into(),
                filter: format!("filter{f}"),
                label: Label::Attack,
                score: rng.gen::<f64>() + 0.2,
            });
        }
    }
    ScoreTable::new(records).unwrap()
}

fn bench_average_deer(c: &mut Criterion) {
    let table = score_table(6, 400);
    let mut group = c.benchmark_group("average_deer");
    group.bench_function("parallel", |b| {
        b.iter(|| average_deer(black_box(&table), "s").unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| average_deer_seq(black_box(&table), "s").unwrap())
    });
    group.finish();
}

fn bench_srm_batch(c: &mut Criterion) {
    let mut rng = seeds::substream(2, "bench-srm", 0);
    let images: Vec<RgbImage> = (0..16)
        .map(|_| {
            let mut plane = || {
                ImagePlane::from_fn(96, 96, |_, _| f64::from(rng.gen_range(0u32..=255))).unwrap()
            };
            RgbImage::new(plane(), plane(), plane()).unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("srm_batch");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| srm_residuals_batch(black_box(&images), 2.0).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| srm_residuals_batch_seq(black_box(&images), 2.0).unwrap())
    });
    group.finish();
}

fn bench_forest_train(c: &mut Criterion) {
    let mut rng = seeds::substream(3, "bench-forest", 0);
    let data: Vec<FeatureVector> = (0..400)
        .map(|_| {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            let label = if x * y > 0.0 { Label::Attack } else { Label::BonaFide };
            FeatureVector::new(vec![x, y, rng.gen()], label).unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("forest_train");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| train_forest(black_box(&data), 40, 7).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| train_forest_seq(black_box(&data), 40, 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_average_deer, bench_srm_batch, bench_forest_train);
criterion_main!(benches);
