//! Circuit-to-pulse compilation with a fixed waveform skeleton.
//!
//! Gates are arranged into alternating single-qubit and CZ cycles, each
//! single-qubit cycle is squeezed to one SU(2) per qubit and realized as two
//! π/2 pulses whose phases absorb the rotation angles.

mod schedule;

use std::f64::consts::FRAC_PI_2;

use crate::circuit::{matrix_1q, Circuit, GateKind, Mat2};
use crate::{Error, Result, C64};

pub use schedule::{
    emit_schedule, schedule_unitary, tanh_envelope, EnvelopeSpec, PulseEvent, PulseSchedule, Timing,
};

/// Determinant-normalized 2×2 unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2(pub Mat2);

impl Su2 {
    pub fn identity() -> Self {
        Su2(matrix_1q(GateKind::Identity, 0.0))
    }

    /// Scale `m` so that `det = 1`.
    pub fn normalized(m: Mat2) -> Self {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let s = det.sqrt();
        Su2([[m[0][0] / s, m[0][1] / s], [m[1][0] / s, m[1][1] / s]])
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }
}

pub(crate) fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

/// Product of a run of bound single-qubit gates, applied left to right.
pub fn squeeze_su2(run: &[(GateKind, f64)]) -> Su2 {
    let m = run
        .iter()
        .fold(matrix_1q(GateKind::Identity, 0.0), |acc, &(k, a)| mul2(&matrix_1q(k, a), &acc));
    Su2::normalized(m)
}

/// `(λ, θ, φ)` with `u ≅ Rz(φ)·Rx(π/2)·Rz(θ)·Rx(π/2)·Rz(λ)`.
pub fn u3_decompose(u: &Su2) -> (f64, f64, f64) {
    let [[a, _], [b, _]] = u.0;
    let theta_y = 2.0 * b.norm().atan2(a.norm());
    let (pa, pb) = (a.arg(), b.arg());
    let phi_z = pb - pa;
    let lambda_z = -pa - pb;
    (wrap(lambda_z), wrap(theta_y + std::f64::consts::PI), wrap(phi_z + std::f64::consts::PI))
}

/// Angle folded into `(−π, π]`.
pub fn wrap(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// Recompose `Rz(φ)·Rx(π/2)·Rz(θ)·Rx(π/2)·Rz(λ)`.
pub fn u3_matrix(lambda: f64, theta: f64, phi: f64) -> Mat2 {
    let x = matrix_1q(GateKind::Rx, FRAC_PI_2);
    [
        matrix_1q(GateKind::Rz, lambda),
        x,
        matrix_1q(GateKind::Rz, theta),
        x,
        matrix_1q(GateKind::Rz, phi),
    ]
    .iter()
    .fold(matrix_1q(GateKind::Identity, 0.0), |acc, g| mul2(g, &acc))
}

/// Alternating cycles: `one_qubit[0]`, `cz[0]`, `one_qubit[1]`, …, `one_qubit[m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredCircuit {
    pub n_qubits: usize,
    /// One SU(2) per qubit per cycle.
    pub one_qubit: Vec<Vec<Su2>>,
    /// Disjoint CZ pairs per cycle.
    pub cz: Vec<Vec<(usize, usize)>>,
}

impl LayeredCircuit {
    pub fn n_cycles(&self) -> usize {
        self.one_qubit.len() + self.cz.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.one_qubit.len() != self.cz.len() + 1 {
            return Err(Error::InvalidAnsatz("cycles do not alternate".into()));
        }
        for cycle in &self.one_qubit {
            if cycle.len() != self.n_qubits {
                return Err(Error::InvalidAnsatz("single-qubit cycle misses a qubit".into()));
            }
        }
        for pairs in &self.cz {
            let mut used = vec![false; self.n_qubits];
            for &(a, b) in pairs {
                for q in [a, b] {
                    if std::mem::replace(&mut used[q], true) {
                        return Err(Error::DuplicateTargets(vec![a, b]));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Bound runs of single-qubit gates per cycle, before squeezing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CycleRuns {
    pub one_qubit: Vec<Vec<Vec<(GateKind, f64)>>>,
    pub cz: Vec<Vec<(usize, usize)>>,
}

/// Arrange the bound circuit into cycles; CNOTs become `H·CZ·H` on the target.
pub fn layerize_runs(circ: &Circuit, theta: &[f64]) -> Result<CycleRuns> {
    let n = circ.n_qubits();
    let angles = circ.bind(theta)?;
    let mut runs = CycleRuns {
        one_qubit: vec![vec![Vec::new(); n]],
        cz: Vec::new(),
    };
    let mut next = vec![0usize; n];
    let place_cz = |runs: &mut CycleRuns, next: &mut [usize], a: usize, b: usize| -> usize {
        let c = next[a].max(next[b]);
        while runs.cz.len() <= c {
            runs.cz.push(Vec::new());
            runs.one_qubit.push(vec![Vec::new(); n]);
        }
        runs.cz[c].push((a, b));
        next[a] = c + 1;
        next[b] = c + 1;
        c
    };
    for (op, angle) in circ.ops().iter().zip(angles) {
        match op.kind {
            GateKind::Cz => {
                place_cz(&mut runs, &mut next, op.targets[0], op.targets[1]);
            }
            GateKind::Cnot => {
                let (a, b) = (op.targets[0], op.targets[1]);
                runs.one_qubit[next[b]][b].push((GateKind::H, 0.0));
                let c = place_cz(&mut runs, &mut next, a, b);
                runs.one_qubit[c + 1][b].push((GateKind::H, 0.0));
            }
            k if k.arity() == 1 => {
                let q = op.targets[0];
                runs.one_qubit[next[q]][q].push((k, angle.unwrap_or(0.0)));
            }
            k => return Err(Error::UnsupportedGate(k.name())),
        }
    }
    Ok(runs)
}

pub fn layerize(circ: &Circuit, theta: &[f64]) -> Result<LayeredCircuit> {
    let runs = layerize_runs(circ, theta)?;
    Ok(LayeredCircuit {
        n_qubits: circ.n_qubits(),
        one_qubit: runs
            .one_qubit
            .iter()
            .map(|cycle| cycle.iter().map(|r| squeeze_su2(r)).collect())
            .collect(),
        cz: runs.cz,
    })
}

/// Lower NH/NI blocks, layerize and emit the schedule.
pub fn compile_circuit(circ: &Circuit, theta: &[f64], timing: &Timing, envelope: &EnvelopeSpec) -> Result<PulseSchedule> {
    let lc = layerize(&circ.lowered(), theta)?;
    emit_schedule(&lc, timing, envelope)
}
