//! Weighted subspace-search cost with optional total-spin penalties.
//!
//! `C(θ) = Σᵢ wᵢ ⟨Φᵢ| U(θ)† Oᵢ U(θ) |Φᵢ⟩` where `O = H` plus the penalty
//! operator. All penalties are expanded into Pauli sums, so the cost is linear
//! in each output state and exact parameter-shift gradients apply throughout.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind};
use crate::hamiltonians::SymmetryOps;
use crate::noise::{run_noisy, NoiseModel};
use crate::pauli::{Pauli, PauliSum};
use crate::sim::{postselect_sz, sample_probabilities, HalfInt, QuantumState};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    None,
    /// `β ⟨S_tot²⟩` per initial state.
    STot2 { beta: f64 },
    /// `β ⟨(S_tot² − target)²⟩` per initial state.
    STot2Target { beta: f64, target: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Exact,
    Shots { shots: u64, seed: u64 },
    Noisy {
        model: NoiseModel,
        #[serde(default)]
        shots: Option<u64>,
        #[serde(default)]
        seed: u64,
    },
}

/// One initial state: its preparation circuit (if any) and the prepared state.
#[derive(Clone, Debug)]
pub struct InitState {
    pub label: String,
    pub circuit: Option<Circuit>,
    pub state: QuantumState,
}

impl InitState {
    pub fn from_label(label: &str) -> Result<Self> {
        let state = crate::initstates::target_statevector(label)?;
        let circuit = match crate::initstates::init_circuit(label) {
            Ok(c) => Some(c),
            Err(Error::NoCircuit(_)) => None,
            Err(e) => return Err(e),
        };
        let state = match &circuit {
            Some(c) => {
                let mut s = QuantumState::zero(c.n_qubits());
                s.apply_circuit(c, &[])?;
                s
            }
            None => state,
        };
        Ok(Self {
            label: label.to_string(),
            circuit,
            state,
        })
    }
}

/// Qubit-wise commuting measurement group.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementGroup {
    /// Basis per qubit; `I` means measured in `Z`.
    pub basis: Vec<Pauli>,
    pub terms: Vec<usize>,
}

impl MeasurementGroup {
    pub fn is_z_basis(&self) -> bool {
        self.basis.iter().all(|&p| p == Pauli::I || p == Pauli::Z)
    }
}

/// Greedy grouping seeded with the uniform all-Z, all-X, all-Y bases.
pub fn measurement_groups(observable: &PauliSum) -> Vec<MeasurementGroup> {
    let n = observable.n_qubits();
    let mut groups: Vec<MeasurementGroup> = [Pauli::Z, Pauli::X, Pauli::Y]
        .iter()
        .map(|&p| MeasurementGroup {
            basis: vec![p; n],
            terms: Vec::new(),
        })
        .collect();
    for (i, (_, s)) in observable.terms().iter().enumerate() {
        if s.is_identity() {
            continue;
        }
        match groups.iter_mut().find(|g| s.qubitwise_compatible(&g.basis)) {
            Some(g) => {
                for (b, &p) in g.basis.iter_mut().zip(s.ops()) {
                    if p != Pauli::I {
                        *b = p;
                    }
                }
                g.terms.push(i);
            }
            None => {
                let mut basis = vec![Pauli::I; n];
                basis.iter_mut().zip(s.ops()).for_each(|(b, &p)| *b = p);
                groups.push(MeasurementGroup {
                    basis,
                    terms: vec![i],
                });
            }
        }
    }
    groups.retain(|g| !g.terms.is_empty());
    groups
}

fn rotate_to_z(state: &mut QuantumState, basis: &[Pauli]) {
    use crate::circuit::matrix_1q;
    let h = matrix_1q(GateKind::H, 0.0);
    let sdg = matrix_1q(GateKind::Rz, -FRAC_PI_2);
    for (q, &p) in basis.iter().enumerate() {
        match p {
            Pauli::X => state.apply_1q(q, &h),
            Pauli::Y => {
                state.apply_1q(q, &sdg);
                state.apply_1q(q, &h);
            }
            _ => {}
        }
    }
}

/// Value of the group's observable part on outcome `b`.
fn group_value(observable: &PauliSum, group: &MeasurementGroup, n: usize, b: usize) -> f64 {
    group
        .terms
        .iter()
        .map(|&t| {
            let (c, s) = &observable.terms()[t];
            let mask: usize = s
                .ops()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != Pauli::I)
                .map(|(q, _)| 1usize << (n - 1 - q))
                .sum();
            if (b & mask).count_ones().is_multiple_of(2) {
                c.re
            } else {
                -c.re
            }
        })
        .sum()
}

/// Estimate plus standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Options for measuring an observable from a state by basis rotation.
#[derive(Clone, Debug, Default)]
pub struct MeasureOptions<'a> {
    pub shots: Option<u64>,
    pub seed: u64,
    /// Discard outcomes of Z-basis groups whose magnetization differs.
    pub postselect: Option<HalfInt>,
    pub readout: Option<&'a NoiseModel>,
    /// Undo the readout confusion on each group's distribution.
    pub correct_readout: bool,
}

/// Measure `observable` group by group.
pub fn measure(state: &QuantumState, observable: &PauliSum, opts: &MeasureOptions) -> Result<Estimate> {
    if let Some(s) = observable.non_hermitian_term() {
        return Err(Error::NonHermitian(s.to_string()));
    }
    let n = state.n_qubits();
    let mut value = observable.trace_coefficient().re;
    let mut var = 0.0;
    for (gi, group) in measurement_groups(observable).iter().enumerate() {
        let mut rotated = state.clone();
        rotate_to_z(&mut rotated, &group.basis);
        let mut probs = rotated.probabilities();
        if let Some(model) = opts.readout {
            probs = model.apply_readout(&probs);
        }
        let f: Vec<f64> = (0..probs.len()).map(|b| group_value(observable, group, n, b)).collect();
        let postselect = opts.postselect.filter(|_| group.is_z_basis());
        match opts.shots {
            None => {
                if let Some(target) = postselect {
                    let keep = |b: usize| crate::sim::twice_sz_of(b, n) == target.twice();
                    let total: f64 = (0..probs.len()).filter(|&b| keep(b)).map(|b| probs[b]).sum();
                    if total <= 0.0 {
                        return Err(Error::AllShotsDiscarded);
                    }
                    probs = (0..probs.len())
                        .map(|b| if keep(b) { probs[b] / total } else { 0.0 })
                        .collect();
                }
                if opts.correct_readout {
                    if let Some(model) = opts.readout {
                        probs = crate::noise::correct_probabilities(&probs, model)?;
                    }
                }
                value += probs.iter().zip(&f).map(|(p, x)| p * x).sum::<f64>();
            }
            Some(shots) => {
                let seed = opts.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(gi as u64 + 1));
                let mut hist = sample_probabilities(&probs, n, shots, seed);
                if let Some(target) = postselect {
                    hist = postselect_sz(&hist, target);
                }
                let kept = hist.retained();
                if kept == 0 {
                    return Err(Error::AllShotsDiscarded);
                }
                if opts.correct_readout {
                    if let Some(model) = opts.readout {
                        let p = crate::noise::readout_correct(&hist, model)?;
                        value += p.iter().zip(&f).map(|(p, x)| p * x).sum::<f64>();
                        let m2: f64 = p.iter().zip(&f).map(|(p, x)| p * x * x).sum();
                        let m1: f64 = p.iter().zip(&f).map(|(p, x)| p * x).sum();
                        var += (m2 - m1 * m1).max(0.0) / kept as f64;
                        continue;
                    }
                }
                let counts = hist.count_vector();
                let mean: f64 = counts.iter().zip(&f).map(|(&c, x)| c as f64 * x).sum::<f64>() / kept as f64;
                let m2: f64 = counts.iter().zip(&f).map(|(&c, x)| c as f64 * x * x).sum::<f64>() / kept as f64;
                value += mean;
                var += (m2 - mean * mean).max(0.0) / kept as f64;
            }
        }
    }
    Ok(Estimate {
        value,
        stderr: var.sqrt(),
    })
}

/// Subspace-search cost definition.
#[derive(Clone, Debug)]
pub struct CostSpec {
    hamiltonian: PauliSum,
    ansatz: Circuit,
    inits: Vec<InitState>,
    weights: Vec<f64>,
    penalty: Penalty,
    backend: Backend,
    postselect: bool,
    observable: PauliSum,
}

impl CostSpec {
    pub fn new(
        hamiltonian: PauliSum,
        ansatz: Circuit,
        inits: Vec<InitState>,
        weights: Vec<f64>,
        penalty: Penalty,
        backend: Backend,
    ) -> Result<Self> {
        if inits.is_empty() {
            return Err(Error::InvalidCost("at least one initial state is required".into()));
        }
        if weights.len() != inits.len() {
            return Err(Error::InvalidCost(format!(
                "{} weights for {} initial states",
                weights.len(),
                inits.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) || weights.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidCost("weights must be positive and strictly decreasing".into()));
        }
        let n = hamiltonian.n_qubits();
        if ansatz.n_qubits() != n || inits.iter().any(|i| i.state.n_qubits() != n) {
            return Err(Error::InvalidCost("register sizes do not match".into()));
        }
        if let Some(s) = hamiltonian.non_hermitian_term() {
            return Err(Error::NonHermitian(s.to_string()));
        }
        let ops = SymmetryOps::new(n);
        let observable = match penalty {
            Penalty::None => hamiltonian.clone(),
            Penalty::STot2 { beta } | Penalty::STot2Target { beta, .. } if !(beta > 0.0) => {
                return Err(Error::InvalidCost("penalty weight β must be positive".into()))
            }
            Penalty::STot2 { beta } => &hamiltonian + &ops.s_tot2.scale(beta),
            Penalty::STot2Target { beta, target } => {
                &hamiltonian + &ops.s_tot2_deviation_squared(target).scale(beta)
            }
        };
        if let Backend::Noisy { model, .. } = &backend {
            model.validate()?;
            if inits.iter().any(|i| i.circuit.is_none()) {
                return Err(Error::InvalidCost(
                    "noisy evaluation needs a preparation circuit for every initial state".into(),
                ));
            }
        }
        Ok(Self {
            hamiltonian,
            ansatz,
            inits,
            weights,
            penalty,
            backend,
            postselect: false,
            observable,
        })
    }

    /// Postselect Z-basis shots on each initial state's magnetization.
    pub fn with_postselection(mut self, enabled: bool) -> Self {
        self.postselect = enabled;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn ansatz(&self) -> &Circuit {
        &self.ansatz
    }

    pub fn inits(&self) -> &[InitState] {
        &self.inits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Hamiltonian plus penalty operator.
    pub fn observable(&self) -> &PauliSum {
        &self.observable
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::ParameterLength {
                expected: self.n_params(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Noiseless output states `U(θ)|Φᵢ⟩`.
    pub fn output_states(&self, theta: &[f64]) -> Result<Vec<QuantumState>> {
        self.check_len(theta)?;
        let angles = self.ansatz.bind(theta)?;
        Ok(self.outputs_bound(&angles))
    }

    fn outputs_bound(&self, angles: &[Option<f64>]) -> Vec<QuantumState> {
        self.inits
            .iter()
            .map(|init| {
                let mut s = init.state.clone();
                s.apply_bound(&self.ansatz, angles);
                s
            })
            .collect()
    }

    fn sz_target(&self, init: &InitState) -> Result<Option<HalfInt>> {
        if !self.postselect {
            return Ok(None);
        }
        let sz = init.state.expectation(&SymmetryOps::new(init.state.n_qubits()).s_z)?;
        Ok(Some(HalfInt::round(sz)))
    }

    fn estimate_bound(&self, angles: &[Option<f64>], theta: &[f64], observable: &PauliSum) -> Result<Vec<Estimate>> {
        match &self.backend {
            Backend::Exact => self
                .outputs_bound(angles)
                .iter()
                .map(|s| {
                    s.expectation(observable).map(|value| Estimate { value, stderr: 0.0 })
                })
                .collect(),
            Backend::Shots { shots, seed } => self
                .outputs_bound(angles)
                .iter()
                .zip(&self.inits)
                .enumerate()
                .map(|(i, (s, init))| {
                    let opts = MeasureOptions {
                        shots: Some(*shots),
                        seed: seed.wrapping_add(i as u64),
                        postselect: self.sz_target(init)?,
                        ..Default::default()
                    };
                    measure(s, observable, &opts)
                })
                .collect(),
            Backend::Noisy { model, shots, seed } => self
                .inits
                .iter()
                .enumerate()
                .map(|(i, init)| {
                    let mut full = init.circuit.clone().expect("checked at construction");
                    full = full.with_n_params(self.ansatz.n_params())?;
                    full.append(&self.ansatz)?;
                    let rho = run_noisy(&QuantumState::zero(full.n_qubits()), &full, theta, model)?;
                    if shots.is_none() && !model.has_readout() && !self.postselect {
                        return rho.expectation(observable).map(|value| Estimate { value, stderr: 0.0 });
                    }
                    let opts = MeasureOptions {
                        shots: *shots,
                        seed: seed.wrapping_add(i as u64),
                        postselect: self.sz_target(init)?,
                        readout: model.has_readout().then_some(model),
                        correct_readout: model.has_readout(),
                    };
                    measure(&rho, observable, &opts)
                })
                .collect(),
        }
    }

    fn weighted(&self, estimates: &[Estimate]) -> f64 {
        estimates.iter().zip(&self.weights).map(|(e, w)| w * e.value).sum()
    }

    /// Cost value at `theta`.
    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        self.check_len(theta)?;
        let angles = self.ansatz.bind(theta)?;
        let est = self.estimate_bound(&angles, theta, &self.observable)?;
        Ok(self.weighted(&est))
    }

    /// `⟨H⟩` of each output state on the configured backend.
    pub fn energies(&self, theta: &[f64]) -> Result<Vec<Estimate>> {
        self.check_len(theta)?;
        let angles = self.ansatz.bind(theta)?;
        self.estimate_bound(&angles, theta, &self.hamiltonian)
    }

    /// Exact `⟨H⟩` of each output state, ignoring the backend.
    pub fn exact_energies(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.output_states(theta)?
            .iter()
            .map(|s| s.expectation(&self.hamiltonian))
            .collect()
    }

    /// Gradient by the parameter-shift rule, accumulated over tied gates.
    ///
    /// The noisy backend falls back to central finite differences.
    pub fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(theta)?;
        if matches!(self.backend, Backend::Noisy { .. }) {
            return self.finite_difference_gradient(theta, 1e-5);
        }
        let base = self.ansatz.bind(theta)?;
        let mut grad = vec![0.0; self.n_params()];
        for (op_index, expr) in self.ansatz.parametric_ops() {
            let kind = self.ansatz.ops()[op_index].kind;
            let gap = kind.generator_gap().expect("parametric gate");
            let shift = FRAC_PI_2 / gap;
            let eval_at = |delta: f64| -> Result<f64> {
                let mut angles = base.clone();
                angles[op_index] = angles[op_index].map(|a| a + delta);
                let est = self.estimate_bound(&angles, theta, &self.observable)?;
                Ok(self.weighted(&est))
            };
            let plus = eval_at(shift)?;
            let minus = eval_at(-shift)?;
            grad[expr.index] += expr.coefficient * 0.5 * gap * (plus - minus);
        }
        Ok(grad)
    }

    pub fn finite_difference_gradient(&self, theta: &[f64], step: f64) -> Result<Vec<f64>> {
        let mut x = theta.to_vec();
        (0..theta.len())
            .map(|i| {
                x[i] = theta[i] + step;
                let plus = self.evaluate(&x)?;
                x[i] = theta[i] - step;
                let minus = self.evaluate(&x)?;
                x[i] = theta[i];
                Ok((plus - minus) / (2.0 * step))
            })
            .collect()
    }
}

/// Cost selection by name: `energy`, `C1`, `C2`, `C3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostKind {
    #[serde(rename = "energy")]
    Energy,
    C1,
    C2,
    C3,
}

impl CostKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "energy" => Ok(CostKind::Energy),
            "C1" | "c1" => Ok(CostKind::C1),
            "C2" | "c2" => Ok(CostKind::C2),
            "C3" | "c3" => Ok(CostKind::C3),
            _ => Err(Error::InvalidCost(format!("unknown cost `{name}`"))),
        }
    }

    /// Default weights for `p` initial states and the default penalty.
    pub fn defaults(self, p: usize) -> (Vec<f64>, Penalty) {
        let weights = match (self, p) {
            (CostKind::C1 | CostKind::C3, 2) => vec![2.0, 1.0],
            (_, p) => (0..p).map(|i| (p - i) as f64).collect(),
        };
        let penalty = match self {
            CostKind::C1 => Penalty::STot2 { beta: 10.0 },
            CostKind::C2 => Penalty::STot2Target { beta: 5.0, target: 6.0 },
            _ => Penalty::None,
        };
        (weights, penalty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_ansatz, AnsatzSpec, Symmetry};
    use crate::hamiltonians::{heisenberg_chain, Model};
    use rand::{Rng, SeedableRng};

    fn s1_cost(backend: Backend) -> CostSpec {
        let (ansatz, _) = build_ansatz(&AnsatzSpec::new(Model::Heisenberg, Symmetry::TotalSpin, 4, 2)).unwrap();
        CostSpec::new(
            heisenberg_chain(4, 1.0).unwrap(),
            ansatz,
            vec![InitState::from_label("heis4/S1").unwrap()],
            vec![1.0],
            Penalty::None,
            backend,
        )
        .unwrap()
    }

    #[test]
    fn identity_ansatz_gives_singlet_pair_energy() {
        let c = s1_cost(Backend::Exact);
        assert!((c.evaluate(&[0.0; 4]).unwrap() + 6.0).abs() < 1e-12);
        assert!(matches!(c.evaluate(&[0.0; 3]), Err(Error::ParameterLength { .. })));
    }

    #[test]
    fn weights_must_decrease() {
        let (ansatz, _) = build_ansatz(&AnsatzSpec::new(Model::Heisenberg, Symmetry::TotalSpin, 4, 1)).unwrap();
        let inits = vec![
            InitState::from_label("heis4/S2a").unwrap(),
            InitState::from_label("heis4/S2b").unwrap(),
        ];
        let h = heisenberg_chain(4, 1.0).unwrap();
        let r = CostSpec::new(h, ansatz, inits, vec![1.0, 1.0], Penalty::None, Backend::Exact);
        assert!(matches!(r, Err(Error::InvalidCost(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = s1_cost(Backend::Exact);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let theta: Vec<f64> = (0..4).map(|_| rng.random_range(-1.5..1.5)).collect();
        let g = c.gradient(&theta).unwrap();
        let fd = c.finite_difference_gradient(&theta, 1e-5).unwrap();
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_cost_has_zero_gradient() {
        let (ansatz, _) = build_ansatz(&AnsatzSpec::new(Model::Heisenberg, Symmetry::ZMagnetization, 4, 1)).unwrap();
        let c = CostSpec::new(
            PauliSum::identity(4, 2.5),
            ansatz,
            vec![InitState::from_label("heis4/Q/0").unwrap()],
            vec![1.0],
            Penalty::None,
            Backend::Exact,
        )
        .unwrap();
        let g = c.gradient(&[0.3, -0.2, 0.1, 0.9]).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn quintet_penalty_vanishes() {
        let (ansatz, _) = build_ansatz(&AnsatzSpec::new(Model::Heisenberg, Symmetry::TotalSpin, 4, 1)).unwrap();
        let c = CostSpec::new(
            heisenberg_chain(4, 1.0).unwrap(),
            ansatz,
            vec![InitState::from_label("heis4/Q/+2").unwrap()],
            vec![1.0],
            Penalty::STot2Target { beta: 5.0, target: 6.0 },
            Backend::Exact,
        )
        .unwrap();
        let state = QuantumState::basis(4, 0);
        let penalty = state
            .expectation(&SymmetryOps::new(4).s_tot2_deviation_squared(6.0))
            .unwrap();
        assert!(penalty.abs() < 1e-12);
        assert!((c.evaluate(&[0.2, 0.7]).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn grouping_covers_every_term_once() {
        let h = &heisenberg_chain(4, 1.0).unwrap()
            + &SymmetryOps::new(4).s_tot2_deviation_squared(6.0);
        let groups = measurement_groups(&h);
        let mut seen: Vec<usize> = groups.iter().flat_map(|g| g.terms.clone()).collect();
        seen.sort();
        let expected: Vec<usize> = (0..h.len()).filter(|&i| !h.terms()[i].1.is_identity()).collect();
        assert_eq!(seen, expected);
        let heis_groups = measurement_groups(&heisenberg_chain(6, 1.0).unwrap());
        assert_eq!(heis_groups.len(), 3);
    }

    #[test]
    fn shots_converge_to_exact() {
        let theta = [0.3, -0.4, 0.8, 0.1];
        let exact = s1_cost(Backend::Exact).evaluate(&theta).unwrap();
        let shots = s1_cost(Backend::Shots { shots: 6000, seed: 9 });
        let est = shots.energies(&theta).unwrap()[0];
        assert!((est.value - exact).abs() < 5.0 * est.stderr, "{} vs {exact}", est.value);
        let post = shots.with_postselection(true).energies(&theta).unwrap()[0];
        assert!((post.value - exact).abs() < 5.0 * post.stderr);
    }
}
