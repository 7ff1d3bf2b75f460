use std::hint::black_box;

use beltrami_core::dilatation::{k_t_mu, lehto_integral_rule};
use beltrami_core::dirichlet::{harmonic_dirichlet, schwarz_disk};
use beltrami_core::{solve_normalized, BoundaryData, Complex64, ComplexField, DomainSpec, Field, Grid, MuField, TransformPlan};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn radial(grid: Grid) -> MuField {
    MuField::from_fn(grid, |z| z / z.conj() / 3.0, |z| z.norm() < 1.0).unwrap()
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("beurling");
    for n in [128usize, 256, 512] {
        let grid = Grid::new(2.0, n).unwrap();
        let plan = TransformPlan::new(grid);
        let omega: ComplexField = Field::from_fn(grid, |z| Complex64::new((-4.0 * z.norm_sqr()).exp(), 0.0));
        group.bench_with_input(BenchmarkId::from_parameter(n), &omega, |b, w| {
            b.iter(|| plan.beurling_transform(black_box(w)).unwrap())
        });
    }
    group.finish();
}

fn beltrami(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_normalized");
    group.sample_size(10);
    for n in [128usize, 256] {
        let mu = radial(Grid::new(2.0, n).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(n), &mu, |b, mu| {
            b.iter(|| solve_normalized(black_box(mu), 1e-10, 200).unwrap())
        });
    }
    group.finish();
}

fn harmonic(c: &mut Criterion) {
    let mut group = c.benchmark_group("harmonic_dirichlet");
    group.sample_size(10);
    for n in [64usize, 128] {
        let d = DomainSpec::disk(Grid::new(2.0, n).unwrap(), Complex64::new(0.0, 0.0), 1.0, 256).unwrap();
        let phi = BoundaryData::from_fn(&d, |z| z.re * z.im).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &(d, phi), |b, (d, phi)| {
            b.iter(|| harmonic_dirichlet(d, phi, 1e-10).unwrap())
        });
    }
    group.finish();
}

fn diagnostics(c: &mut Criterion) {
    let mu = radial(Grid::new(2.0, 256).unwrap());
    c.bench_function("k_t_mu/256", |b| b.iter(|| k_t_mu(black_box(&mu), Complex64::new(0.1, 0.2))));
    c.bench_function("lehto_rule", |b| {
        b.iter(|| lehto_integral_rule(|r: f64| (1.0 / r).ln().max(1.0), black_box(1e-6), 0.5).unwrap())
    });
    c.bench_function("schwarz/2048", |b| b.iter(|| schwarz_disk(|z| (3.0 * z.arg()).cos(), black_box(2048)).unwrap()));
}

criterion_group!(benches, transforms, beltrami, harmonic, diagnostics);
criterion_main!(benches);
