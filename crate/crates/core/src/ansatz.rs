//! Symmetry-preserving layered ansatz circuits.
//!
//! One layer is a row of two-site blocks on bonds `(0,1), (2,3), …`, then on
//! bonds `(1,2), (3,4), …`, then (for the magnetization and parity classes) one
//! `Rz` per qubit. Heisenberg blocks are `N_H`, Ising blocks are `N_I`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{circuit_unitary, Angle, Circuit, GateKind, GateOp, ParamExpr};
use crate::hamiltonians::Model;
use crate::linalg::{commutator_max, CMatrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// Blocks only; conserves `S_tot²` and `S_z`.
    TotalSpin,
    /// Blocks plus `Rz` layer; conserves `S_z`.
    ZMagnetization,
    /// `N_I` blocks plus `Rz` layer; conserves `Π_z`.
    ZParity,
}

/// Sign relation between a gate and its mirror partner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tie {
    #[default]
    Symmetric,
    Antisymmetric,
}

impl Tie {
    fn coefficient(self) -> f64 {
        match self {
            Tie::Symmetric => 1.0,
            Tie::Antisymmetric => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub model: Model,
    pub symmetry: Symmetry,
    pub n_qubits: usize,
    pub layers: usize,
    /// Tie gates to their mirror image across the chain midpoint.
    pub mirror: bool,
    #[serde(default)]
    pub block_tie: Tie,
    #[serde(default)]
    pub rotation_tie: Tie,
}

impl AnsatzSpec {
    pub fn new(model: Model, symmetry: Symmetry, n_qubits: usize, layers: usize) -> Self {
        Self {
            model,
            symmetry,
            n_qubits,
            layers,
            mirror: true,
            block_tie: Tie::Symmetric,
            rotation_tie: Tie::Symmetric,
        }
    }

    pub fn without_mirror(mut self) -> Self {
        self.mirror = false;
        self
    }

    pub fn block_tie(mut self, tie: Tie) -> Self {
        self.block_tie = tie;
        self
    }

    pub fn rotation_tie(mut self, tie: Tie) -> Self {
        self.rotation_tie = tie;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::ChainTooShort(self.n_qubits));
        }
        if self.layers == 0 {
            return Err(Error::InvalidAnsatz("at least one layer is required".into()));
        }
        let ok = matches!(
            (self.model, self.symmetry),
            (Model::Ising, Symmetry::ZParity)
                | (Model::Heisenberg, Symmetry::TotalSpin | Symmetry::ZMagnetization)
        );
        if !ok {
            return Err(Error::InvalidAnsatz(format!(
                "{:?} symmetry is not available for the {:?} model",
                self.symmetry, self.model
            )));
        }
        Ok(())
    }

    fn block_kind(&self) -> GateKind {
        match self.model {
            Model::Heisenberg => GateKind::Nh,
            Model::Ising => GateKind::Ni,
        }
    }

    fn has_rotations(&self) -> bool {
        self.symmetry != Symmetry::TotalSpin
    }
}

/// Parameter bookkeeping of a built ansatz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub n_params: usize,
    /// One entry per parametric gate, in circuit order.
    pub assignments: Vec<ParamExpr>,
}

impl ParamLayout {
    /// Number of gates referencing each parameter.
    pub fn usage(&self) -> Vec<usize> {
        let mut u = vec![0; self.n_params];
        for a in &self.assignments {
            u[a.index] += 1;
        }
        u
    }
}

/// Assign parameters to `items` (indexed positions in a row), reusing the
/// mirror partner's parameter when it was assigned earlier in the same layer.
fn assign_row(
    items: &[usize],
    mirror_of: impl Fn(usize) -> usize,
    spec: &AnsatzSpec,
    tie: Tie,
    assigned: &mut Vec<(usize, ParamExpr)>,
    next: &mut usize,
) -> Vec<ParamExpr> {
    items
        .iter()
        .map(|&i| {
            let partner = mirror_of(i);
            let reuse = spec
                .mirror
                .then(|| assigned.iter().find(|(k, _)| *k == partner && partner != i))
                .flatten()
                .map(|(_, p)| ParamExpr::scaled(p.index, tie.coefficient()));
            let expr = reuse.unwrap_or_else(|| {
                *next += 1;
                ParamExpr::new(*next - 1)
            });
            assigned.push((i, expr));
            expr
        })
        .collect()
}

/// Build the layered circuit and its parameter layout.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<(Circuit, ParamLayout)> {
    spec.validate()?;
    let n = spec.n_qubits;
    let odd: Vec<usize> = (0..n - 1).step_by(2).collect();
    let even: Vec<usize> = (1..n - 1).step_by(2).collect();
    let qubits: Vec<usize> = (0..n).collect();
    let mut ops = Vec::new();
    let mut next = 0usize;
    for _ in 0..spec.layers {
        let mut bonds = Vec::new();
        let odd_p = assign_row(&odd, |i| n - 2 - i, spec, spec.block_tie, &mut bonds, &mut next);
        let even_p = assign_row(&even, |i| n - 2 - i, spec, spec.block_tie, &mut bonds, &mut next);
        for (&b, p) in odd.iter().chain(&even).zip(odd_p.into_iter().chain(even_p)) {
            ops.push(GateOp::with_angle(spec.block_kind(), &[b, b + 1], Angle::Param(p)));
        }
        if spec.has_rotations() {
            let mut sites = Vec::new();
            let rz = assign_row(&qubits, |q| n - 1 - q, spec, spec.rotation_tie, &mut sites, &mut next);
            for (&q, p) in qubits.iter().zip(rz) {
                ops.push(GateOp::with_angle(GateKind::Rz, &[q], Angle::Param(p)));
            }
        }
    }
    let mut circuit = Circuit::new(n, next);
    let mut assignments = Vec::with_capacity(ops.len());
    for op in ops {
        if let Some(Angle::Param(p)) = op.angle {
            assignments.push(p);
        }
        circuit.push(op)?;
    }
    Ok((
        circuit,
        ParamLayout {
            n_params: next,
            assignments,
        },
    ))
}

/// Largest `‖[U(θ), S]‖_max` over `draws` random parameter vectors in `[−π, π]`.
pub fn verify_symmetry(circ: &Circuit, symmetry: &CMatrix, draws: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let theta: Vec<f64> = (0..circ.n_params())
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let u = circuit_unitary(circ, &theta)?;
        worst = worst.max(commutator_max(&u, symmetry));
    }
    Ok(worst)
}
