use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dwell_bench::{problem, two_bump_density};
use dwell_core::harness::measure_instance;
use dwell_core::hartree::solve_double_well;
use dwell_core::model::Grid;
use dwell_core::operators::{assemble_hamiltonian, convolve_kernel, ConvolutionMethod};
use dwell_core::spectrum::lowest_eigenpairs;
use dwell_core::{Boundary, EigenMethod, EigenOptions, RunConfig};

fn eigensolve(c: &mut Criterion) {
    let grid = Grid::new(8.0, 0.02).unwrap();
    let h = assemble_hamiltonian(&grid.sample(|x| x * x), &grid.zeros(), Boundary::Box).unwrap();
    let mut group = c.benchmark_group("harmonic_lowest_three");
    for method in [EigenMethod::Dense, EigenMethod::Iterative] {
        let opts = EigenOptions {
            method,
            ..EigenOptions::default()
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{method:?}")),
            &opts,
            |b, o| b.iter(|| lowest_eigenpairs(&h, 3, o).unwrap()),
        );
    }
    group.finish();
}

fn convolution(c: &mut Criterion) {
    let p = problem(6.0, 0.2);
    let rho = two_bump_density(&p);
    let mut group = c.benchmark_group("mean_field_convolution");
    for method in [ConvolutionMethod::Direct, ConvolutionMethod::Fft] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{method:?}")),
            &method,
            |b, &m| b.iter(|| convolve_kernel(&rho, &p.interaction, m)),
        );
    }
    group.finish();
}

fn scf(c: &mut Criterion) {
    let opts = RunConfig::default().scf_options();
    let p = problem(6.0, 0.2);
    c.bench_function("scf_double_well_L6", |b| {
        b.iter(|| solve_double_well(&p, &opts).unwrap())
    });
}

fn instance(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let mut group = c.benchmark_group("measure_instance_L6");
    group.sample_size(20);
    group.bench_function("lambda_0.2", |b| {
        b.iter(|| measure_instance(&cfg, 6.0, 0.2).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigensolve, convolution, scf, instance);
criterion_main!(benches);
