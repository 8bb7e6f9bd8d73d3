use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qigeom::linalg::operator_norm;
use qigeom::pl::kuhn_triangulation;
use qigeom::MatrixN;
use qigeom_bench::{grid_queries, pl_map};

fn locate_and_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("pl_eval");
    let queries_per_iter = 1_000;
    group.throughput(Throughput::Elements(queries_per_iter as u64));
    for (n, res) in [(2, 16), (3, 8), (4, 4)] {
        let f = pl_map(n, res);
        let queries = grid_queries(n, queries_per_iter);
        group.bench_with_input(BenchmarkId::new(format!("n{n}"), res), &queries, |b, qs| {
            b.iter(|| {
                qs.iter()
                    .map(|q| f.eval(black_box(q)).expect("inside box")[0])
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

fn differential_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("pl_differential_norm");
    for (n, res) in [(2, 16), (3, 8)] {
        let f = pl_map(n, res);
        group.bench_function(BenchmarkId::new(format!("n{n}"), res), |b| {
            b.iter(|| black_box(&f).differential_norm().expect("nondegenerate"))
        });
    }
    group.finish();
}

fn triangulate(c: &mut Criterion) {
    c.bench_function("kuhn_triangulation_n3_r16", |b| {
        b.iter(|| kuhn_triangulation(3, -1.0, 1.0, black_box(16)).expect("valid grid"))
    });
}

fn norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator_norm");
    for n in [2, 4, 8] {
        let m = MatrixN::new(
            n,
            (0..n * n)
                .map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0)
                .collect(),
        )
        .expect("finite");
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| operator_norm(black_box(m)))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    locate_and_eval,
    differential_norm,
    triangulate,
    norms
);
criterion_main!(benches);
