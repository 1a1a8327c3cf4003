//! Built-in experiments, one per reported state, plus shared manifold runs.

use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, AnsatzSpec, Symmetry, Tie};
use crate::cost::{Backend, CostKind, CostSpec, InitState, Penalty};
use crate::hamiltonians::{chain, Model};
use crate::initstates::init_circuit;
use crate::noise::NoiseModel;
use crate::optim::{init_parameters, AdamConfig, HybridConfig, NelderMeadConfig, OptimResult, Optimizer};
use crate::zne::ZneExperiment;
use crate::{Error, Result};

/// Reference bookkeeping for one table row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub params: usize,
    pub cnots_per_cycle: usize,
    /// CNOTs at nine folding cycles, as tabulated.
    pub cnots_k9: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub key: String,
    pub model: Model,
    pub n_qubits: usize,
    pub ansatz: AnsatzSpec,
    /// Initial-state labels in weight order.
    pub inits: Vec<String>,
    pub cost: CostKind,
    pub weights: Vec<f64>,
    pub penalty: Penalty,
    pub optimizer: Optimizer,
    /// Output index holding this row's state.
    pub report: usize,
    /// Exact energies expected for each output.
    pub targets: Vec<f64>,
    pub table: Option<TableRow>,
}

const HEIS4: [f64; 6] = [-6.464101615137754, -3.8284271247461903, -1.0, 0.4641016151377546, 1.8284271247461903, 3.0];
const HEIS8: [f64; 3] = [-13.4997303948, -11.9289619511, -10.0149162775];
const ISING4: [f64; 3] = [-4.758770483143634, -4.064177772475912, -2.758770483143634];
const ISING8: [f64; 3] = [-9.8379514475, -9.4688780096, -8.7432994872];

fn nm() -> Optimizer {
    Optimizer::NelderMead(NelderMeadConfig::default())
}

fn nm_long(max_iters: usize) -> Optimizer {
    Optimizer::NelderMead(NelderMeadConfig {
        max_iters,
        ..NelderMeadConfig::default()
    })
}

fn hybrid() -> Optimizer {
    Optimizer::Hybrid(HybridConfig::default())
}

fn adam_long(max_iters: usize) -> Optimizer {
    Optimizer::Adam(AdamConfig {
        max_iters,
        ..AdamConfig::default()
    })
}

fn sz_suffix(sz: i32) -> String {
    if sz > 0 {
        format!("+{sz}")
    } else {
        sz.to_string()
    }
}

#[allow(clippy::too_many_arguments)]
fn make(
    key: &str,
    ansatz: AnsatzSpec,
    inits: &[String],
    cost: CostKind,
    optimizer: Optimizer,
    report: usize,
    targets: &[f64],
    table: Option<TableRow>,
) -> Experiment {
    let (weights, penalty) = cost.defaults(inits.len());
    Experiment {
        key: key.to_string(),
        model: ansatz.model,
        n_qubits: ansatz.n_qubits,
        ansatz,
        inits: inits.to_vec(),
        cost,
        weights,
        penalty,
        optimizer,
        report,
        targets: targets.to_vec(),
        table,
    }
}

fn row(params: usize, cnots_per_cycle: usize, cnots_k9: usize) -> Option<TableRow> {
    Some(TableRow {
        params,
        cnots_per_cycle,
        cnots_k9,
    })
}

/// Every experiment key, table rows first, then the shared manifold runs.
pub fn all_keys() -> Vec<String> {
    let mut v = vec!["heis4/S1".to_string(), "heis4/S2".to_string()];
    for t in 1..=3 {
        for sz in [1, 0, -1] {
            v.push(format!("heis4/T{t}/{}", sz_suffix(sz)));
        }
    }
    for sz in [2, 1, 0, -1, -2] {
        v.push(format!("heis4/Q/{}", sz_suffix(sz)));
    }
    v.extend(["heis8/S1", "heis8/T1/0", "heis8/T2/0"].map(String::from));
    for n in [4, 8] {
        for e in 1..=3 {
            v.push(format!("ising{n}/E{e}"));
        }
    }
    for sz in [1, 0, -1] {
        v.push(format!("heis4/T/{}", sz_suffix(sz)));
    }
    v
}

/// Look up a built-in experiment.
pub fn experiment(key: &str) -> Result<Experiment> {
    let unknown = || Error::UnknownLabel(key.to_string());
    let heis = |sym, n, l| AnsatzSpec::new(Model::Heisenberg, sym, n, l);
    let parts: Vec<&str> = key.split('/').collect();
    let e = match parts.as_slice() {
        ["heis4", "S1"] => make(
            key,
            heis(Symmetry::TotalSpin, 4, 2),
            &["heis4/S1".into()],
            CostKind::Energy,
            nm(),
            0,
            &HEIS4[..1],
            row(4, 18, 180),
        ),
        ["heis4", "S2"] => make(
            key,
            heis(Symmetry::ZMagnetization, 4, 3).rotation_tie(Tie::Antisymmetric),
            &["heis4/S2a".into(), "heis4/S2b".into()],
            CostKind::C1,
            hybrid(),
            1,
            &[HEIS4[0], HEIS4[3]],
            row(12, 27, 243),
        ),
        ["heis4", "T", sz] => {
            let sz: i32 = sz.trim_start_matches('+').parse().map_err(|_| unknown())?;
            if sz.abs() > 1 {
                return Err(unknown());
            }
            let s = sz_suffix(sz);
            let inits: Vec<String> = (1..=3).map(|t| format!("heis4/T{t}/{s}")).collect();
            make(
                key,
                heis(Symmetry::TotalSpin, 4, 2),
                &inits,
                CostKind::Energy,
                nm(),
                0,
                &[HEIS4[1], HEIS4[2], HEIS4[4]],
                None,
            )
        }
        ["heis4", t, sz] if t.starts_with('T') => {
            let idx: usize = t[1..].parse().map_err(|_| unknown())?;
            if !(1..=3).contains(&idx) {
                return Err(unknown());
            }
            let mut e = experiment(&format!("heis4/T/{sz}"))?;
            let k9 = if *sz == "0" { 189 } else { 207 };
            e.key = key.to_string();
            e.report = idx - 1;
            e.table = row(4, 18, k9);
            e
        }
        ["heis4", "Q", sz] => {
            let sz: i32 = sz.trim_start_matches('+').parse().map_err(|_| unknown())?;
            let label = format!("heis4/Q/{}", sz_suffix(sz));
            match sz.abs() {
                2 => make(key, heis(Symmetry::TotalSpin, 4, 1), &[label], CostKind::Energy, nm(), 0, &HEIS4[5..], row(2, 9, 81)),
                0 | 1 => make(
                    key,
                    heis(Symmetry::ZMagnetization, 4, 2).rotation_tie(Tie::Antisymmetric),
                    &[label],
                    CostKind::C2,
                    hybrid(),
                    0,
                    &HEIS4[5..],
                    row(8, 18, 162),
                ),
                _ => return Err(unknown()),
            }
        }
        ["heis8", "S1"] => make(
            key,
            heis(Symmetry::TotalSpin, 8, 3),
            &["heis8/S1".into()],
            CostKind::Energy,
            nm_long(1500),
            0,
            &HEIS8[..1],
            row(12, 63, 603),
        ),
        ["heis8", "T1", "0"] => make(
            key,
            heis(Symmetry::TotalSpin, 8, 4).block_tie(Tie::Antisymmetric),
            &["heis8/T1/0".into()],
            CostKind::Energy,
            nm_long(1500),
            0,
            &HEIS8[1..2],
            row(16, 84, 792),
        ),
        ["heis8", "T2", "0"] => make(
            key,
            heis(Symmetry::TotalSpin, 8, 4).block_tie(Tie::Antisymmetric),
            &["heis8/T1/0".into(), "heis8/T2/0".into()],
            CostKind::C3,
            nm_long(1500),
            1,
            &HEIS8[1..3],
            row(16, 84, 792),
        ),
        [head, e] if head.starts_with("ising") && e.starts_with('E') => {
            let n: usize = head[5..].parse().map_err(|_| unknown())?;
            let idx: usize = e[1..].parse().map_err(|_| unknown())?;
            let (layers, energies, table, opt) = match n {
                4 => (2, ISING4, row(8, 12, 117), nm()),
                8 => (3, ISING8, row(24, 42, 378), adam_long(1000)),
                _ => return Err(unknown()),
            };
            if !(1..=3).contains(&idx) {
                return Err(unknown());
            }
            make(
                key,
                AnsatzSpec::new(Model::Ising, Symmetry::ZParity, n, layers),
                &[key.to_string()],
                CostKind::Energy,
                opt,
                0,
                &[energies[idx - 1]],
                table,
            )
        }
        _ => return Err(unknown()),
    };
    Ok(e)
}

/// Outcome of one seeded training run.
#[derive(Clone, Debug, PartialEq)]
pub struct Training {
    pub seed: u64,
    pub result: OptimResult,
    /// Exact `⟨H⟩` of every output state at the trained point.
    pub energies: Vec<f64>,
}

impl Training {
    /// Largest deviation from the expected energies.
    pub fn max_error(&self, targets: &[f64]) -> f64 {
        self.energies
            .iter()
            .zip(targets)
            .map(|(e, t)| (e - t).abs())
            .fold(0.0, f64::max)
    }
}

impl Experiment {
    pub fn hamiltonian(&self) -> Result<crate::PauliSum> {
        chain(self.model, self.n_qubits, 1.0, 1.0)
    }

    pub fn cost_spec(&self, backend: Backend) -> Result<CostSpec> {
        let (ansatz, _) = build_ansatz(&self.ansatz)?;
        let inits = self
            .inits
            .iter()
            .map(|l| InitState::from_label(l))
            .collect::<Result<Vec<_>>>()?;
        let postselect = self.model == Model::Heisenberg;
        Ok(CostSpec::new(
            self.hamiltonian()?,
            ansatz,
            inits,
            self.weights.clone(),
            self.penalty,
            backend,
        )?
        .with_postselection(postselect))
    }

    /// CNOTs of one ansatz cycle.
    pub fn cnots_per_cycle(&self) -> Result<usize> {
        Ok(build_ansatz(&self.ansatz)?.0.cnot_count())
    }

    pub fn n_params(&self) -> Result<usize> {
        Ok(build_ansatz(&self.ansatz)?.1.n_params)
    }

    /// Largest initializer CNOT count among the inits.
    pub fn init_cnots(&self) -> Result<usize> {
        self.inits
            .iter()
            .map(|l| match init_circuit(l) {
                Ok(c) => Ok(c.cnot_count()),
                Err(Error::NoCircuit(_)) => Ok(0),
                Err(e) => Err(e),
            })
            .try_fold(0, |m, c| c.map(|c| m.max(c)))
    }

    /// Total CNOTs with ansatz and initializer folded at odd `k`.
    pub fn cnots_at(&self, k: usize) -> Result<usize> {
        if k.is_multiple_of(2) {
            return Err(Error::EvenFoldFactor(k));
        }
        Ok(k * (self.cnots_per_cycle()? + self.init_cnots()?))
    }

    /// Train from `init_parameters(n, seed)` on `backend`.
    pub fn train(&self, seed: u64, backend: Backend) -> Result<Training> {
        let cost = self.cost_spec(backend)?;
        let x0 = init_parameters(cost.n_params(), seed);
        let opt = self.optimizer.with_seed(seed);
        let result = opt.minimize(|x| cost.evaluate(x), |x| cost.gradient(x), &x0)?;
        let energies = cost.exact_energies(&result.params)?;
        Ok(Training { seed, result, energies })
    }

    /// Energy of the reported state after training.
    pub fn reported_energy(&self, t: &Training) -> f64 {
        t.energies[self.report]
    }

    pub fn reported_target(&self) -> f64 {
        self.targets[self.report]
    }

    /// Folding setup for output `state` of a trained circuit, measuring `H`.
    pub fn zne_experiment(
        &self,
        state: usize,
        theta: &[f64],
        noise: NoiseModel,
        shots: Option<u64>,
        seed: u64,
    ) -> Result<ZneExperiment> {
        let label = self
            .inits
            .get(state)
            .ok_or_else(|| Error::InvalidCost(format!("no output state {state}")))?;
        let (ansatz, _) = build_ansatz(&self.ansatz)?;
        Ok(ZneExperiment {
            init: init_circuit(label)?,
            ansatz,
            theta: theta.to_vec(),
            observable: self.hamiltonian()?,
            noise,
            shots,
            seed,
        })
    }
}
