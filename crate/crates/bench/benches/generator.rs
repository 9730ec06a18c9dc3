use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qlbe_core::diffusion::{dpp_quadrature, DiffusionQuadrature};
use qlbe_core::evolution::step;
use qlbe_core::generator::build_channels;
use qlbe_core::{
    DensityMatrix, GasComponent, GasMixture, Generator, GeneratorConfig, Liouvillian, Masses, MomentumGrid,
    ScatteringAmplitude,
};

fn config() -> GeneratorConfig {
    GeneratorConfig {
        masses: Masses::new(1.0, 1.0).unwrap(),
        gas: GasMixture::single(GasComponent::new(1.0, 1.0, 1.0).unwrap()),
        amplitude: ScatteringAmplitude::constant(0.5, 1.0).unwrap(),
        tau: 4.0,
        k_order: 64,
        shifts: vec![-4, -3, -2, -1, 1, 2, 3, 4],
        include_hamiltonian: true,
        coupling: None,
    }
}

fn apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("generator_apply");
    for n in [32usize, 64, 128] {
        let grid = MomentumGrid::new(n, 0.25).unwrap();
        let gen = Generator::new(&config(), grid).unwrap();
        let rho = DensityMatrix::gaussian_packet(grid, 0.0, 0.5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| gen.apply(black_box(rho.elements())))
        });
    }
    group.finish();
}

fn build(c: &mut Criterion) {
    let grid = MomentumGrid::new(64, 0.25).unwrap();
    let cfg = config();
    c.bench_function("build_channels_n64", |b| b.iter(|| build_channels(black_box(&cfg), &grid).unwrap()));
    c.bench_function("generator_new_n64", |b| b.iter(|| Generator::new(black_box(&cfg), grid).unwrap()));
}

fn rk4_step(c: &mut Criterion) {
    let grid = MomentumGrid::new(64, 0.25).unwrap();
    let gen = Generator::new(&config(), grid).unwrap();
    let rho = DensityMatrix::gaussian_packet(grid, 0.0, 0.5).unwrap();
    let dt = 0.1 / gen.spectral_bound();
    c.bench_function("rk4_step_n64", |b| b.iter(|| step(black_box(&rho), &gen, dt).unwrap()));
}

fn diffusion(c: &mut Criterion) {
    let gas = GasComponent::new(1.0, 1.0, 1.0).unwrap();
    let f = ScatteringAmplitude::gaussian(0.5, 2.0, 1.0).unwrap();
    let masses = Masses::new(100.0, 1.0).unwrap();
    let quad = DiffusionQuadrature::default();
    c.bench_function("dpp_quadrature", |b| {
        b.iter(|| dpp_quadrature(black_box(&gas), &f, &masses, &quad).unwrap())
    });
}

criterion_group!(benches, apply, build, rk4_step, diffusion);
criterion_main!(benches);
