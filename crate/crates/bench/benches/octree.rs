use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use dynoct::oracle::{brute_pairs, FlatPointSet};
use dynoct::workload::uniform_cloud;
use dynoct::OctreeConfig;
use dynoct_bench::{cutoff_for_degree, random_moves, random_queries, uniform_tree};

fn update_position(c: &mut Criterion) {
    let mut group = c.benchmark_group("update_position");
    for n in [10_000, 100_000] {
        let moves = random_moves(n, 1000, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter_batched_ref(
                || uniform_tree(n, OctreeConfig::default(), 1),
                |tree| {
                    for &(id, p) in &moves {
                        tree.update_position(id, p).unwrap();
                    }
                },
                BatchSize::LargeInput,
            );
        });
    }
    group.finish();
}

fn k_nearest(c: &mut Criterion) {
    let tree = uniform_tree(100_000, OctreeConfig::default(), 1);
    let queries = random_queries(1000, 3);
    c.bench_function("k_nearest/k=10/n=100000", |b| {
        b.iter(|| queries.iter().map(|&q| tree.k_nearest(q, 10).len()).sum::<usize>());
    });
}

fn neighbor_lists(c: &mut Criterion) {
    let n = 10_000;
    let d = cutoff_for_degree(n, 20.0);
    let mut group = c.benchmark_group("neighbor_lists/n=10000");
    group.sample_size(20);
    for k in [10, 100, 1000] {
        let tree = uniform_tree(n, OctreeConfig::new(k, 2.0).unwrap(), 1);
        group.bench_with_input(BenchmarkId::new("octree", k), &tree, |b, tree| {
            b.iter(|| tree.build_neighbor_lists(d).unwrap());
        });
    }
    let flat = FlatPointSet::from_entries(uniform_cloud(n, 1)).unwrap();
    group.bench_function("flat", |b| b.iter(|| brute_pairs(&flat, d)));
    group.finish();
}

criterion_group!(benches, update_position, k_nearest, neighbor_lists);
criterion_main!(benches);
