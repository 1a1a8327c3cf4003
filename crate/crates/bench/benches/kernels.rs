use criterion::{black_box, criterion_group, criterion_main, Criterion};

use spinspec_core::ansatz::{build_ansatz, AnsatzSpec, Symmetry};
use spinspec_core::catalog::experiment;
use spinspec_core::compile::{compile_circuit, EnvelopeSpec, Timing};
use spinspec_core::hamiltonians::{chain, exact_spectrum};
use spinspec_core::noise::run_noisy;
use spinspec_core::optim::init_parameters;
use spinspec_core::zne::{extrapolate, ZneSeries};
use spinspec_core::{Backend, Model, NoiseModel, QuantumState};

fn simulation(c: &mut Criterion) {
    let h8 = chain(Model::Heisenberg, 8, 1.0, 1.0).unwrap();
    let (ansatz, layout) = build_ansatz(&AnsatzSpec::new(Model::Heisenberg, Symmetry::TotalSpin, 8, 3)).unwrap();
    let theta = init_parameters(layout.n_params, 1);
    c.bench_function("statevector heis8 L3 ansatz", |b| {
        b.iter(|| {
            let mut s = QuantumState::zero(8);
            s.apply_circuit(&ansatz, black_box(&theta)).unwrap();
            s
        })
    });
    let mut s = QuantumState::zero(8);
    s.apply_circuit(&ansatz, &theta).unwrap();
    c.bench_function("expectation heis8", |b| b.iter(|| s.expectation(black_box(&h8)).unwrap()));

    let (a4, l4) = build_ansatz(&AnsatzSpec::new(Model::Heisenberg, Symmetry::TotalSpin, 4, 2)).unwrap();
    let t4 = init_parameters(l4.n_params, 2);
    let noise = NoiseModel::depolarizing(0.001, 0.01);
    c.bench_function("density matrix heis4 L2", |b| {
        b.iter(|| run_noisy(&QuantumState::zero(4), &a4, black_box(&t4), &noise).unwrap())
    });
}

fn costs(c: &mut Criterion) {
    let e = experiment("heis4/S2").unwrap();
    let cost = e.cost_spec(Backend::Exact).unwrap();
    let theta = init_parameters(cost.n_params(), 3);
    c.bench_function("cost C1 heis4", |b| b.iter(|| cost.evaluate(black_box(&theta)).unwrap()));
    c.bench_function("parameter shift C1 heis4", |b| b.iter(|| cost.gradient(black_box(&theta)).unwrap()));
}

fn spectra_and_fits(c: &mut Criterion) {
    let h8 = chain(Model::Ising, 8, 1.0, 1.0).unwrap();
    c.bench_function("exact spectrum ising8", |b| b.iter(|| exact_spectrum(black_box(&h8)).unwrap()));
    let pairs: Vec<(usize, f64)> = (1..=6).map(|k| (k, -5.664 - 0.8 * 0.7f64.powi(k as i32))).collect();
    let series = ZneSeries::from_pairs(&pairs).unwrap();
    c.bench_function("exponential extrapolation", |b| b.iter(|| extrapolate(black_box(&series)).unwrap()));
}

fn compilation(c: &mut Criterion) {
    let e = experiment("heis4/S2").unwrap();
    let theta = init_parameters(e.n_params().unwrap(), 4);
    let circuit = e
        .zne_experiment(0, &theta, NoiseModel::noiseless(), None, 0)
        .unwrap()
        .folded_circuit(1)
        .unwrap();
    let (timing, env) = (Timing::default(), EnvelopeSpec::default());
    c.bench_function("compile heis4 S2 circuit", |b| {
        b.iter(|| compile_circuit(black_box(&circuit), &theta, &timing, &env).unwrap())
    });
}

criterion_group!(benches, simulation, costs, spectra_and_fits, compilation);
criterion_main!(benches);
