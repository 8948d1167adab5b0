//! Sequential versus data-parallel execution of the per-cell kernels.
//!
//! With the `parallel` feature disabled both policies run sequentially, so
//! the bench then measures the policy overhead only.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use msflow::dg::{Assembler, CellSet, IpdgTerms, ModelParameters, Preset};
use msflow::geometry::{generate_structured_mesh, CircleInclusion, CoarseGrid, DomainSpec, Rect, TriMesh};
use msflow::gmsfem::{BasisOptions, MultiscaleSpace};
use msflow::parallel::Execution;

fn setup() -> (TriMesh, CoarseGrid, ModelParameters, Vec<f64>) {
    let inclusions = vec![CircleInclusion::new([-0.4, 0.3], 0.3).unwrap(), CircleInclusion::new([0.4, -0.3], 0.3).unwrap()];
    let d = DomainSpec::new(Rect::symmetric_unit(), inclusions, 0.3).unwrap();
    let (mesh, coarse) = generate_structured_mesh(&d, 4, (4, 4)).unwrap();
    let params = ModelParameters::preset(Preset::Test1, 1e-3).unwrap();
    let lin = msflow::dg::DgState::interpolate(&mesh, |x| [1.0 - 0.5 * x[1] * x[1], 0.1 * x[0]], |_| 0.0).velocity;
    (mesh, coarse, params, lin)
}

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn assembly(c: &mut Criterion) {
    let (mesh, _, params, lin) = setup();
    let set = CellSet::whole(&mesh);
    let mut group = c.benchmark_group("assembly");
    for (name, exec) in POLICIES {
        let asm = Assembler::new(&mesh, &set).with_execution(exec);
        group.bench_function(BenchmarkId::new("ipdg+darcy", name), |b| {
            b.iter(|| {
                let a = asm.ipdg(&params, IpdgTerms::ALL, Some(&lin)).unwrap();
                let d = asm.darcy_forchheimer(&params, Some(&lin)).unwrap();
                (a.nnz(), d.nnz())
            })
        });
    }
    group.finish();
}

fn offline(c: &mut Criterion) {
    let (mesh, coarse, params, lin) = setup();
    let mut group = c.benchmark_group("multiscale_space");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new("build", name), |b| {
            b.iter(|| MultiscaleSpace::build(&mesh, &coarse, &params, &lin, BasisOptions::default(), exec).unwrap().bases.len())
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, offline);
criterion_main!(benches);
