//! End-to-end acceptance checks, one reported line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinspec_cli::{run_compile, run_spectrum, run_vqe, run_zne, ExperimentConfig};
use spinspec_core::ansatz::{build_ansatz, verify_symmetry, AnsatzSpec, Symmetry};
use spinspec_core::catalog::{all_keys, experiment};
use spinspec_core::compile::{compile_circuit, schedule_unitary, EnvelopeSpec, PulseEvent, Timing};
use spinspec_core::hamiltonians::{chain, distinct_levels, exact_spectrum, SymmetryOps};
use spinspec_core::linalg::phase_aligned_distance;
use spinspec_core::optim::init_parameters;
use spinspec_core::zne::{collect_series, extrapolate};
use spinspec_core::{circuit_unitary, Angle, Backend, Circuit, GateKind, Model, NoiseModel, QuantumState, Tie, C64};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() >= want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() < tol)
}

fn spectrum_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut heis4_want = vec![-6.464];
    heis4_want.extend([-3.828; 3]);
    heis4_want.extend([-1.0; 3]);
    heis4_want.push(0.464);
    heis4_want.extend([1.828; 3]);
    heis4_want.extend([3.0; 5]);
    let (h4, _) = exact_spectrum(&chain(Model::Heisenberg, 4, 1.0, 1.0).unwrap()).unwrap();
    let (h8, _) = exact_spectrum(&chain(Model::Heisenberg, 8, 1.0, 1.0).unwrap()).unwrap();
    let h8 = distinct_levels(&h8, 1e-9);
    let (i4, _) = exact_spectrum(&chain(Model::Ising, 4, 1.0, 1.0).unwrap()).unwrap();
    let (i8, _) = exact_spectrum(&chain(Model::Ising, 8, 1.0, 1.0).unwrap()).unwrap();
    let elapsed = t0.elapsed();
    let ok = h4.len() == 16
        && within(&h4, &heis4_want, 1e-3)
        && within(&h8, &[-13.4997, -11.9289, -10.0149], 1e-3)
        && within(&i4, &[-4.759, -4.064, -2.759], 1e-3)
        && within(&i8, &[-9.838, -9.4689, -8.7432], 1e-3)
        && elapsed < Duration::from_secs(5);
    check(ok, format!("heis8 {:.4?}, ising8 {:.4?}, {elapsed:.2?}", &h8[..3], &i8[..3]))
}

fn best_error(key: &str, seeds: u64) -> (f64, usize) {
    let e = experiment(key).unwrap();
    (0..seeds)
        .map(|s| {
            let t = e.train(s, Backend::Exact).unwrap();
            (t.max_error(&e.targets), t.result.trace.records.len())
        })
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
}

fn noiseless_vqe() -> Outcome {
    let t0 = Instant::now();
    let e4 = experiment("heis4/S1").unwrap();
    let e8 = experiment("heis8/S1").unwrap();
    let (err4, iters4) = best_error("heis4/S1", 5);
    let (err8, _) = best_error("heis8/S1", 5);
    let elapsed = t0.elapsed();
    let ok = e4.n_params().unwrap() == 4
        && e8.n_params().unwrap() == 12
        && err4 < 1e-2
        && iters4 <= 200
        && err8 < 5e-2
        && elapsed < Duration::from_secs(600);
    check(ok, format!("heis4 err {err4:.2e} in {iters4} iterations, heis8 err {err8:.2e}, {elapsed:.2?}"))
}

fn ssvqe_singlets() -> Outcome {
    let e = experiment("heis4/S2").unwrap();
    let mut best: Option<Vec<f64>> = None;
    for seed in 0..5 {
        let t = e.train(seed, Backend::Exact).unwrap();
        if best.as_ref().is_none_or(|b| t.max_error(&e.targets) < max_err(b, &e.targets)) {
            best = Some(t.energies);
        }
    }
    let got = best.unwrap();
    check(within(&got, &[-6.464, 0.464], 5e-2), format!("energies {got:.4?}"))
}

fn max_err(got: &[f64], want: &[f64]) -> f64 {
    got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn quintuplet_c2() -> Outcome {
    let ops = SymmetryOps::new(4);
    let dev = ops.s_tot2_deviation_squared(6.0);
    let mut lines = Vec::new();
    let mut ok = true;
    for sz in ["+1", "0", "-1"] {
        let e = experiment(&format!("heis4/Q/{sz}")).unwrap();
        let beta = match e.penalty {
            spinspec_core::Penalty::STot2Target { beta, .. } => beta,
            _ => f64::NAN,
        };
        let cost = e.cost_spec(Backend::Exact).unwrap();
        let (penalty, energy) = (0..5)
            .map(|seed| {
                let t = e.train(seed, Backend::Exact).unwrap();
                let s = &cost.output_states(&t.result.params).unwrap()[0];
                (beta * s.expectation(&dev).unwrap(), t.energies[0])
            })
            .min_by(|a, b| (a.0 + (a.1 - 3.0).abs()).total_cmp(&(b.0 + (b.1 - 3.0).abs())))
            .unwrap();
        ok &= beta == 5.0 && penalty < 1e-3 && (energy - 3.0).abs() < 5e-2;
        lines.push(format!("sz {sz}: penalty {penalty:.1e} E {energy:.4}"));
    }
    check(ok, lines.join(", "))
}

fn symmetry_suite() -> Outcome {
    let mut worst_comm = 0.0f64;
    let mut worst_qn = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2usize, 4, 6] {
        let ops = SymmetryOps::new(n);
        let mirror = ops.mirror_matrix();
        let classes = [
            (AnsatzSpec::new(Model::Heisenberg, Symmetry::TotalSpin, n, 2), vec![ops.s_tot2.to_matrix(), ops.s_z.to_matrix()]),
            (AnsatzSpec::new(Model::Heisenberg, Symmetry::ZMagnetization, n, 2), vec![ops.s_z.to_matrix()]),
            (
                AnsatzSpec::new(Model::Heisenberg, Symmetry::ZMagnetization, n, 2).block_tie(Tie::Symmetric),
                vec![mirror.clone()],
            ),
            (AnsatzSpec::new(Model::Ising, Symmetry::ZParity, n, 2), vec![ops.parity_z.to_matrix(), mirror.clone()]),
        ];
        let observables = [&ops.s_tot2, &ops.s_z, &ops.parity_z];
        for (i, (spec, syms)) in classes.iter().enumerate() {
            let (c, _) = build_ansatz(spec).unwrap();
            for (j, s) in syms.iter().enumerate() {
                worst_comm = worst_comm.max(verify_symmetry(&c, s, 20, (n * 10 + i * 3 + j) as u64).unwrap());
            }
            for _ in 0..20 {
                let theta: Vec<f64> = (0..c.n_params()).map(|_| rng.random_range(-3.2..3.2)).collect();
                let input = if spec.model == Model::Ising {
                    QuantumState::basis(n, 1 | (1 << (n - 1)))
                } else {
                    singlet_product(n)
                };
                let mut out = input.clone();
                out.apply_circuit(&c, &theta).unwrap();
                let before = mirror_value(&input);
                let after = mirror_value(&out);
                worst_qn = worst_qn.max((before - after).abs());
                for (k, o) in observables.iter().enumerate() {
                    let conserved = match spec.symmetry {
                        Symmetry::TotalSpin => k < 2,
                        Symmetry::ZMagnetization => k == 1,
                        Symmetry::ZParity => k == 2,
                    };
                    if conserved {
                        let d = (input.expectation(o).unwrap() - out.expectation(o).unwrap()).abs();
                        worst_qn = worst_qn.max(d);
                    }
                }
            }
        }
    }
    check(
        worst_comm < 1e-9 && worst_qn < 1e-8,
        format!("max commutator {worst_comm:.1e}, max quantum-number drift {worst_qn:.1e}"),
    )
}

fn singlet_product(n: usize) -> QuantumState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![C64::new(1.0, 0.0)];
    for _ in 0..n / 2 {
        let pair = [0.0, h, -h, 0.0];
        amps = amps.iter().flat_map(|a| pair.iter().map(move |p| a * p)).collect();
    }
    QuantumState::normalized(amps)
}

fn mirror_value(s: &QuantumState) -> f64 {
    let n = s.n_qubits();
    let m = SymmetryOps::new(n).mirror_matrix();
    let v = s.amplitudes().unwrap();
    let mv: Vec<C64> = (0..v.len()).map(|r| (0..v.len()).map(|c| m[(r, c)] * v[c]).sum()).collect();
    v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
}

fn gradient_check() -> Outcome {
    let keys = ["heis4/S1", "heis4/S2", "heis4/Q/0", "heis4/T/0", "ising4/E2"];
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let e = experiment(keys[i as usize % keys.len()]).unwrap();
        let cost = e.cost_spec(Backend::Exact).unwrap();
        let theta = init_parameters(cost.n_params(), 100 + i);
        let ps = cost.gradient(&theta).unwrap();
        let fd = cost.finite_difference_gradient(&theta, 1e-5).unwrap();
        worst = worst.max(max_err(&ps, &fd));
    }
    check(worst < 1e-6, format!("max |shift - central difference| {worst:.1e} over 20 pairs"))
}

fn zne_property() -> Outcome {
    let e = experiment("heis4/S1").unwrap();
    let mut halved = 0;
    for seed in 0..50u64 {
        let t = e.train(seed, Backend::Exact).unwrap();
        let reference = t.energies[0];
        let z = e
            .zne_experiment(0, &t.result.params, NoiseModel::depolarizing(0.001, 0.01), Some(6000), seed)
            .unwrap();
        let series = collect_series(&z, &[1, 2, 3, 4, 5, 6]).unwrap();
        let e0 = extrapolate(&series).unwrap().e0;
        let e1 = series.points[0].energy;
        if (e0 - reference).abs() < 0.5 * (e1 - reference).abs() {
            halved += 1;
        }
    }
    let t = e.train(0, Backend::Exact).unwrap();
    let z = e.zne_experiment(0, &t.result.params, NoiseModel::noiseless(), None, 0).unwrap();
    let base = circuit_unitary(&z.folded_circuit(1).unwrap(), &t.result.params).unwrap();
    let drift = (1..=9)
        .map(|k| phase_aligned_distance(&base, &circuit_unitary(&z.folded_circuit(k).unwrap(), &t.result.params).unwrap()))
        .fold(0.0, f64::max);
    check(
        halved >= 45 && drift < 1e-8,
        format!("bias halved in {halved}/50 seeds, folding drift {drift:.1e}"),
    )
}

#[derive(Clone, Copy)]
enum Op {
    One(GateKind, usize),
    Two(GateKind, usize, usize),
}

fn random_structure(rng: &mut impl Rng) -> (usize, Vec<Op>) {
    let n = rng.random_range(1..=4usize);
    let kinds = [GateKind::H, GateKind::X, GateKind::XHalf, GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::Cnot, GateKind::Cz];
    let mut ops = Vec::new();
    for _ in 0..rng.random_range(0..=30) {
        let k = kinds[rng.random_range(0..kinds.len())];
        if k.arity() == 2 {
            if n >= 2 {
                let a = rng.random_range(0..n);
                ops.push(Op::Two(k, a, (a + rng.random_range(1..n)) % n));
            }
        } else {
            ops.push(Op::One(k, rng.random_range(0..n)));
        }
    }
    (n, ops)
}

fn realize(n: usize, ops: &[Op], rng: &mut impl Rng) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for op in ops {
        match *op {
            Op::One(k, q) if k.is_parametric() => {
                c.rotation(k, &[q], Angle::Fixed(rng.random_range(-3.2..3.2))).unwrap();
            }
            Op::One(k, q) => {
                c.gate(k, &[q]).unwrap();
            }
            Op::Two(k, a, b) => {
                c.gate(k, &[a, b]).unwrap();
            }
        }
    }
    c
}

fn compiler_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (timing, env) = (Timing::default(), EnvelopeSpec::default());
    let mut worst = 0.0f64;
    let mut pulses_ok = true;
    let mut skeleton_ok = true;
    for _ in 0..1000 {
        let (n, ops) = random_structure(&mut rng);
        let c = realize(n, &ops, &mut rng);
        let s = compile_circuit(&c, &[], &timing, &env).unwrap();
        let got = schedule_unitary(&s).unwrap();
        worst = worst.max(phase_aligned_distance(&circuit_unitary(&c, &[]).unwrap(), &got));
        for q in 0..n {
            let mut starts: Vec<u64> = s
                .events
                .iter()
                .filter_map(|e| match e {
                    PulseEvent::X90 { qubit, start, .. } if *qubit == q => Some(*start),
                    _ => None,
                })
                .collect();
            starts.dedup();
            pulses_ok &= starts.len() == 2 * s.one_qubit_cycles;
        }
        let twin = realize(n, &ops, &mut rng);
        let s2 = compile_circuit(&twin, &[], &timing, &env).unwrap();
        if s.one_qubit_cycles == s2.one_qubit_cycles && s.two_qubit_cycles == s2.two_qubit_cycles {
            skeleton_ok &= s.skeleton() == s2.skeleton();
        }
    }
    let dt = 1e-3;
    let steps = (env.duration() / dt).round() as usize;
    let integral: f64 = (0..steps).map(|i| env.sample((i as f64 + 0.5) * dt) * dt).sum();
    check(
        worst < 1e-9 && pulses_ok && skeleton_ok && integral.abs() < 1e-12,
        format!("max unitary distance {worst:.1e}, pulse counts {pulses_ok}, skeletons {skeleton_ok}, envelope integral {integral:.1e}"),
    )
}

fn bookkeeping() -> Outcome {
    let mut rows = 0;
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for key in all_keys() {
        let e = experiment(&key).unwrap();
        let Some(row) = e.table else { continue };
        rows += 1;
        let (p, c) = (e.n_params().unwrap(), e.cnots_per_cycle().unwrap());
        if p != row.params || c != row.cnots_per_cycle {
            bad.push(format!("{key}: {p}/{c} vs {}/{}", row.params, row.cnots_per_cycle));
        }
        let k9 = e.cnots_at(9).unwrap();
        if k9 != row.cnots_k9 {
            notes.push(format!("{key} {k9} vs {}", row.cnots_k9));
        }
    }
    let mut detail = format!("{rows} rows checked for parameters and CNOTs per cycle");
    if !bad.is_empty() {
        detail.push_str(&format!("; mismatches: {}", bad.join(", ")));
    }
    if !notes.is_empty() {
        detail.push_str(&format!("; k=9 totals differing from the table: {}", notes.join(", ")));
    }
    check(bad.is_empty() && rows > 0, detail)
}

fn strip_timestamp(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            if let Some(serde_json::Value::Object(meta)) = map.get_mut("metadata") {
                meta.remove("timestamp");
            }
            for x in map.values_mut() {
                strip_timestamp(x);
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timestamp),
        _ => {}
    }
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
                continue;
            }
            let rel = p.strip_prefix(dir).unwrap().display().to_string();
            let bytes = std::fs::read(&p).unwrap();
            let bytes = if rel.ends_with(".json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                strip_timestamp(&mut v);
                serde_json::to_vec(&v).unwrap()
            } else {
                bytes
            };
            out.push((rel, bytes));
        }
    }
    out.sort();
    out
}

fn run_all(root: &Path) {
    let mut cfg = ExperimentConfig::for_key("heis4/S2", 11);
    cfg.seeds = 2;
    cfg.backend = spinspec_cli::config::BackendConfig::Shots { shots: 500 };
    cfg.out = root.join("vqe");
    run_vqe(&cfg).unwrap();
    let mut cfg = ExperimentConfig::for_key("heis4/S1", 3);
    cfg.zne.shots = Some(2000);
    cfg.out = root.join("zne");
    run_zne(&cfg, None).unwrap();
    cfg.out = root.join("spectrum");
    run_spectrum(&cfg).unwrap();
    cfg.out = root.join("compile");
    run_compile(&cfg, None).unwrap();
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_all(a.path());
    run_all(b.path());
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    let differing: Vec<&String> = ta.iter().zip(&tb).filter(|(x, y)| x != y).map(|(x, _)| &x.0).collect();
    check(
        ta.len() == tb.len() && differing.is_empty() && !ta.is_empty(),
        format!("{} output files compared, differing: {differing:?}", ta.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact spectrum oracle", spectrum_oracle),
        ("noiseless VQE", noiseless_vqe),
        ("SSVQE singlet pair", ssvqe_singlets),
        ("quintuplet with target penalty", quintuplet_c2),
        ("symmetry suite", symmetry_suite),
        ("gradient check", gradient_check),
        ("zero-noise extrapolation", zne_property),
        ("compiler suite", compiler_suite),
        ("bookkeeping parity", bookkeeping),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| id.contains(p.as_str()) || name.contains(p.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{id:<12} {tag}  {name} ({:.1?}): {detail}", t0.elapsed());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
