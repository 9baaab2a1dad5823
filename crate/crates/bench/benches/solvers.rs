use criterion::{criterion_group, criterion_main, Criterion};
use gsc_bench::{operator, unit_rhs};
use gsc_core::gff::GibbsChain;
use gsc_core::{build_outer_graph, CarpetSpec, ChainConfig, ResourceCaps, SolverChoice};

fn graphs(c: &mut Criterion) {
    let caps = ResourceCaps::default();
    let spec = CarpetSpec::menger_sponge();
    c.bench_function("outer graph menger N=3", |b| b.iter(|| build_outer_graph(&spec, 3, &caps).unwrap()));
}

fn solvers(c: &mut Criterion) {
    let spec = CarpetSpec::menger_sponge();
    let mut g = c.benchmark_group("menger N=3");
    g.sample_size(10);
    g.bench_function("cholesky factor", |b| b.iter(|| operator(&spec, 3, SolverChoice::Cholesky)));
    let chol = operator(&spec, 3, SolverChoice::Cholesky);
    let cg = operator(&spec, 3, SolverChoice::Cg);
    let rhs = unit_rhs(chol.len());
    g.bench_function("cholesky solve", |b| b.iter(|| chol.solve(&rhs).unwrap()));
    g.bench_function("cg solve", |b| b.iter(|| cg.solve(&rhs).unwrap()));
    g.finish();
}

fn gibbs(c: &mut Criterion) {
    let spec = CarpetSpec::sierpinski_carpet();
    let op = operator(&spec, 3, SolverChoice::Auto);
    let wall: Vec<usize> = (0..op.len()).collect();
    let config = ChainConfig::default();
    let mut chain = GibbsChain::new(&op, &wall, &config, 0, &ResourceCaps::default()).unwrap();
    c.bench_function("gibbs sweep carpet N=3", |b| b.iter(|| chain.sweep().unwrap()));
}

criterion_group!(benches, graphs, solvers, gibbs);
criterion_main!(benches);
