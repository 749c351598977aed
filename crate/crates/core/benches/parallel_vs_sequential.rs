use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use msopoly::logic::{desugar, parse_formula, DOMINATING_SET, INDEPENDENT_SET};
use msopoly::oracle::enumerate_satisfying;
use msopoly::pipeline::{build, BuildOptions};
use msopoly::structures::Graph;

fn workloads() -> Vec<(&'static str, Graph, &'static str)> {
    vec![
        ("enumerate_is_c5", Graph::cycle(5), INDEPENDENT_SET),
        ("enumerate_ds_paw", Graph::new(1..=4, [(1, 2), (2, 3), (1, 3), (3, 4)]).unwrap(), DOMINATING_SET),
    ]
}

fn run(g: &Graph, text: &str) -> usize {
    let f = desugar(&parse_formula(text).unwrap());
    let (s, _) = g.incidence_structure();
    enumerate_satisfying(&f, &s, u128::MAX).unwrap().len()
}

// With the `parallel` feature the same code runs on a one-thread pool and on
// the default pool; without it only the sequential path exists.
fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for (name, g, text) in workloads() {
        #[cfg(feature = "parallel")]
        {
            let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            group.bench_with_input(BenchmarkId::new("sequential", name), &g, |b, g| {
                b.iter(|| one.install(|| run(g, text)))
            });
            group.bench_with_input(BenchmarkId::new("parallel", name), &g, |b, g| b.iter(|| run(g, text)));
        }
        #[cfg(not(feature = "parallel"))]
        group.bench_with_input(BenchmarkId::new("sequential", name), &g, |b, g| b.iter(|| run(g, text)));
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let f = desugar(&parse_formula(INDEPENDENT_SET).unwrap());
    let g = Graph::path(32);
    let mut group = c.benchmark_group("build_p32");
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function("sequential", |b| {
            b.iter(|| one.install(|| build(&g, &f, &BuildOptions::default()).unwrap()))
        });
    }
    group.bench_function("default", |b| b.iter(|| build(&g, &f, &BuildOptions::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, oracle, pipeline);
criterion_main!(benches);
