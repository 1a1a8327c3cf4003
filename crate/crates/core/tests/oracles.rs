use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use spinspec_core::catalog::experiment;
use spinspec_core::initstates::{init_circuit, target_statevector};
use spinspec_core::noise::run_noisy;
use spinspec_core::optim::{adam, init_parameters, nelder_mead, AdamConfig, NelderMeadConfig};
use spinspec_core::sim::{postselect_sz, HalfInt};
use spinspec_core::zne::{collect_series, extrapolate, ZneSeries};
use spinspec_core::{Backend, NoiseModel, Pauli, PauliString, PauliSum, QuantumState};

fn trained_s1() -> (spinspec_core::catalog::Experiment, Vec<f64>) {
    let e = experiment("heis4/S1").unwrap();
    let t = e.train(0, Backend::Exact).unwrap();
    (e, t.result.params)
}

#[test]
fn singlet_z_mean_within_shot_noise() {
    let s = target_statevector("heis4/S1").unwrap();
    let z0 = PauliSum::from_real_terms(4, [(1.0, PauliString::from_sparse(4, &[(0, Pauli::Z)]))]);
    let hist = s.sample(6000, 9);
    let counts = hist.count_vector();
    let mean: f64 = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| if b & 0b1000 == 0 { c as f64 } else { -(c as f64) })
        .sum::<f64>()
        / 6000.0;
    assert!(mean.abs() < 5.0 / 6000f64.sqrt(), "{mean}");
    assert!(s.expectation(&z0).unwrap().abs() < 1e-12);
}

#[test]
fn conserved_magnetization_keeps_every_shot() {
    let (e, theta) = trained_s1();
    let cost = e.cost_spec(Backend::Exact).unwrap();
    let out = &cost.output_states(&init_parameters(theta.len(), 3)).unwrap()[0];
    let kept = postselect_sz(&out.sample(6000, 4), HalfInt::from_int(0));
    assert_eq!(kept.retention_ratio(), 1.0);
}

#[test]
fn init_circuit_inverse_round_trip() {
    let c = init_circuit("heis4/S1").unwrap();
    let mut round = c.clone();
    round.append(&c.invert()).unwrap();
    let mut s = QuantumState::zero(4);
    s.apply_circuit(&round, &[]).unwrap();
    assert!((s.fidelity_with(QuantumState::zero(4).amplitudes().unwrap()) - 1.0).abs() < 1e-10);
}

#[test]
fn initial_parameters_are_uniform_on_half_pi() {
    let x = init_parameters(100_000, 12);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let half = std::f64::consts::FRAC_PI_2;
    assert!(mean.abs() < 0.02, "{mean}");
    assert!((lo + half).abs() < 1e-3 && (hi - half).abs() < 1e-3, "{lo} {hi}");
    assert!(lo >= -half && hi <= half);
}

#[test]
fn nelder_mead_scalar_quadratic() {
    for seed in 0..5 {
        let cfg = NelderMeadConfig {
            seed,
            ..NelderMeadConfig::default()
        };
        let r = nelder_mead(|x| Ok((x[0] - 0.3).powi(2)), &init_parameters(1, seed), &cfg).unwrap();
        assert!((r.params[0] - 0.3).abs() < 1e-4, "{:?}", r.params);
        assert!(r.trace.records.len() <= 200);
    }
}

#[test]
fn adam_single_step() {
    let cfg = AdamConfig {
        max_iters: 1,
        ..AdamConfig::default()
    };
    let r = adam(|x| Ok(x[0] * x[0]), |x| Ok(vec![2.0 * x[0]]), &[1.0], &cfg).unwrap();
    assert!((r.params[0] - 0.9).abs() < 1e-6, "{:?}", r.params);
}

#[test]
fn adam_quadratic_bowl() {
    let center = [0.5, -1.0, 0.25, 2.0];
    let cfg = AdamConfig {
        max_iters: 500,
        ..AdamConfig::default()
    };
    let f = |x: &[f64]| Ok(x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum());
    let g = |x: &[f64]| Ok(x.iter().zip(&center).map(|(a, b)| 2.0 * (a - b)).collect());
    let r = adam(f, g, &[0.0; 4], &cfg).unwrap();
    for (a, b) in r.params.iter().zip(&center) {
        assert!((a - b).abs() < 1e-3, "{:?}", r.params);
    }
}

#[test]
fn folding_lowers_fidelity_under_noise() {
    let (e, theta) = trained_s1();
    let z = e.zne_experiment(0, &theta, NoiseModel::depolarizing(0.001, 0.01), None, 0).unwrap();
    let mut ideal = QuantumState::zero(4);
    ideal.apply_circuit(&z.folded_circuit(1).unwrap(), &theta).unwrap();
    let fid = |k: usize| {
        run_noisy(&QuantumState::zero(4), &z.folded_circuit(k).unwrap(), &theta, &z.noise)
            .unwrap()
            .fidelity_with(ideal.amplitudes().unwrap())
    };
    let (f3, f5) = (fid(3), fid(5));
    assert!(f5 < f3 && f3 < 1.0, "{f3} {f5}");
}

#[test]
fn noisy_energy_rises_toward_zero() {
    let (e, theta) = trained_s1();
    let z = e.zne_experiment(0, &theta, NoiseModel::depolarizing(0.0, 0.01), None, 0).unwrap();
    let series = collect_series(&z, &[1, 2, 3, 4, 5, 6]).unwrap();
    let es: Vec<f64> = series.points.iter().map(|p| p.energy).collect();
    assert!(es.windows(2).all(|w| w[0] < w[1]), "{es:?}");
    assert!(es.iter().all(|&x| x < 0.0));
    let fit = extrapolate(&series).unwrap();
    assert!((fit.e0 + 6.464).abs() < (es[0] + 6.464).abs());
}

#[test]
fn noiseless_extrapolation_is_flat() {
    let (e, theta) = trained_s1();
    let z = e.zne_experiment(0, &theta, NoiseModel::noiseless(), None, 0).unwrap();
    let series = collect_series(&z, &[1, 2, 3, 4, 5, 6]).unwrap();
    let fit = extrapolate(&series).unwrap();
    assert!((fit.e0 - series.points[0].energy).abs() < 1e-8);
}

#[test]
fn noisy_synthetic_series_extrapolates() {
    let (a, b, c) = (-5.664, -0.8, -(0.7f64).ln());
    let mut errs: Vec<f64> = (0..100u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs: Vec<(usize, f64)> = (1..=6)
                .map(|k| {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    (k, a + b * (-c * k as f64).exp() * (1.0 + 0.01 * xi))
                })
                .collect();
            (extrapolate(&ZneSeries::from_pairs(&pairs).unwrap()).unwrap().e0 + 6.464).abs()
        })
        .collect();
    errs.sort_by(f64::total_cmp);
    assert!(errs[94] < 0.05, "95th percentile {}", errs[94]);
}
