use couette_core::{
    ChannelGrid, LinearModeState, LinearSolver, NonlinearSolver, NonlinearState,
    PerturbationPreset, ShearProfile, SpectralField,
};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_stepping(c: &mut Criterion) {
    let nu = 1e-4;

    let grid = ChannelGrid::new(8, 256, 2.0 / 3.0).unwrap();
    let solver = LinearSolver::new(grid.clone());
    let profile = ShearProfile::couette(nu, solver.basis(), grid.y_nodes());
    let field = PerturbationPreset::RandomBand {
        seed: 1,
        k_band: 1,
        n_band: 60,
        epsilon: 1.0,
    }
    .realize(&grid, 0.75, nu)
    .unwrap();
    let state = LinearModeState::new(1, field.mode(1).to_vec(), profile).unwrap();
    c.bench_function("linear_step_256", |b| {
        b.iter(|| solver.step(black_box(&state), 0.05).unwrap())
    });

    let grid = ChannelGrid::new(32, 128, 2.0 / 3.0).unwrap();
    let nl = NonlinearSolver::new(grid.clone());
    let profile = ShearProfile::couette(nu, nl.basis(), grid.y_nodes());
    let field: SpectralField = PerturbationPreset::RandomBand {
        seed: 2,
        k_band: 4,
        n_band: 40,
        epsilon: 5e-4,
    }
    .realize(&grid, 0.75, nu)
    .unwrap();
    let nl_state = NonlinearState::new(field, profile).unwrap();
    let mut group = c.benchmark_group("nonlinear");
    group.sample_size(30);
    group.bench_function("step_32x128", |b| {
        b.iter(|| nl.step(black_box(&nl_state), 0.02).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_stepping);
criterion_main!(benches);
