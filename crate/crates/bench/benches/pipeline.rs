use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use vesselmorph::{
    decompose, make_field, segment, skeletonize, tortuosity_map, warp_image, ElasticParams, Rng, SegmenterParams,
    TortuosityParams,
};
use vesselmorph_bench::{wavy_band, wavy_image};

fn bench_skeleton(c: &mut Criterion) {
    let mask = wavy_band(344, 276, 4.0);
    c.bench_function("skeletonize_344x276", |b| b.iter(|| skeletonize(black_box(&mask))));
    let skel = skeletonize(&mask);
    let graph = decompose(&skel);
    let params = TortuosityParams::default();
    c.bench_function("tortuosity_map_344x276", |b| {
        b.iter(|| tortuosity_map(black_box(&graph), &params))
    });
}

fn bench_segment(c: &mut Criterion) {
    let img = wavy_image(344, 276, 4.0);
    let params = SegmenterParams::default();
    c.bench_function("segment_344x276", |b| b.iter(|| segment(black_box(&img), &params)));
}

fn bench_elastic(c: &mut Criterion) {
    let img = wavy_image(344, 276, 4.0);
    let params = ElasticParams::default();
    let rng = Rng::new(7);
    c.bench_function("elastic_field_344x276", |b| b.iter(|| make_field(344, 276, black_box(&params), &rng)));
    let field = make_field(344, 276, &params, &rng).unwrap();
    c.bench_function("elastic_warp_344x276", |b| b.iter(|| warp_image(black_box(&img), &field)));
}

criterion_group!(benches, bench_skeleton, bench_segment, bench_elastic);
criterion_main!(benches);
