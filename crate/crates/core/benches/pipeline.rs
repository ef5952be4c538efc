use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use arise_core::dataset::extract_vocabulary;
use arise_core::encoding::{MemoryTokens, Pooling, StubEncoder};
use arise_core::fusion::{
    build_views, select_alpha, silhouette_exact, KMeansConfig, SearchOptions, SilhouetteMode,
    Views,
};
use arise_core::scaling::synthetic_dataset;
use arise_core::semantics::{
    enrich_vocabulary, DescriptionCache, EnrichOptions, PromptSpec, StubSource,
};
use arise_core::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn views(n: usize) -> (Views, usize) {
    let k = 4;
    let ds = synthetic_dataset(n, 10, 5, k, 7).unwrap();
    let vocab = extract_vocabulary(&ds);
    let mut cache = DescriptionCache::in_memory();
    let report = enrich_vocabulary(
        &ds,
        &vocab,
        &StubSource,
        &PromptSpec::default(),
        &mut cache,
        &EnrichOptions::default(),
    )
    .unwrap();
    let tokens: MemoryTokens = StubEncoder::new(16).unwrap().encode_records(&report.records).unwrap();
    let v = build_views(&ds, Some(&tokens), Pooling::Attention, false, Execution::Parallel).unwrap();
    (v, k)
}

fn alpha_search(c: &mut Criterion) {
    let (v, k) = views(1000);
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut group = c.benchmark_group("alpha_search_n1000");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = SearchOptions {
            kmeans: KMeansConfig::default(),
            silhouette: SilhouetteMode::Exact,
            exec,
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| select_alpha(&v.anchor, &v.semantic, k, &grid, 0, &opts).unwrap())
        });
    }
    group.finish();
}

fn silhouette(c: &mut Criterion) {
    let (v, k) = views(2000);
    let labels: Vec<usize> = (0..v.anchor.rows()).map(|i| i % k).collect();
    let mut group = c.benchmark_group("silhouette_n2000");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| silhouette_exact(&v.anchor, &labels, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, alpha_search, silhouette);
criterion_main!(benches);
