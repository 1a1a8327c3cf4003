//! Gate-level circuit IR with symbolic, tied parameters.

mod decompose;
mod gates;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{identity, CMatrix};
use crate::sim::QuantumState;
use crate::{Error, Result};

pub use decompose::{decompose_nh, decompose_ni};
pub use gates::{matrix_1q, matrix_2q, Mat2, Mat4};
pub use text::parse_circuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    /// π/2 rotation about x.
    XHalf,
    XHalfDag,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cz,
    Identity,
    /// `exp(iθ(XX + YY + ZZ))`.
    Nh,
    /// `exp(−iθ XX / 2)`.
    Ni,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Nh | GateKind::Ni => 2,
            _ => 1,
        }
    }

    pub fn is_parametric(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Nh | GateKind::Ni
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::XHalf => "SX",
            GateKind::XHalfDag => "SXDG",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Identity => "I",
            GateKind::Nh => "NH",
            GateKind::Ni => "NI",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "SX" => GateKind::XHalf,
            "SXDG" => GateKind::XHalfDag,
            "RX" => GateKind::Rx,
            "RY" => GateKind::Ry,
            "RZ" => GateKind::Rz,
            "CNOT" | "CX" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "I" | "ID" => GateKind::Identity,
            "NH" => GateKind::Nh,
            "NI" => GateKind::Ni,
            _ => return None,
        })
    }

    /// Eigenvalue gap of the generator `G` in `U = exp(−iθG)`.
    ///
    /// Sets the parameter-shift rule: shift `π/(2Δ)`, prefactor `Δ/2`.
    pub fn generator_gap(self) -> Option<f64> {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Ni => Some(1.0),
            GateKind::Nh => Some(4.0),
            _ => None,
        }
    }
}

/// Affine reference `coefficient · θ[index] + offset` into the parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamExpr {
    pub index: usize,
    pub coefficient: f64,
    pub offset: f64,
}

impl ParamExpr {
    pub fn new(index: usize) -> Self {
        Self {
            index,
            coefficient: 1.0,
            offset: 0.0,
        }
    }

    pub fn scaled(index: usize, coefficient: f64) -> Self {
        assert!(coefficient != 0.0, "parameter coefficient must be non-zero");
        Self {
            index,
            coefficient,
            offset: 0.0,
        }
    }

    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        theta
            .get(self.index)
            .map(|t| self.coefficient * t + self.offset)
            .ok_or(Error::UnboundParameter {
                index: self.index,
                len: theta.len(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Fixed(f64),
    Param(ParamExpr),
}

impl Angle {
    pub fn param(index: usize) -> Self {
        Angle::Param(ParamExpr::new(index))
    }

    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        match self {
            Angle::Fixed(a) => Ok(*a),
            Angle::Param(p) => p.eval(theta),
        }
    }

    /// `scale · angle + shift`, staying symbolic when the angle is.
    pub fn affine(&self, scale: f64, shift: f64) -> Angle {
        match *self {
            Angle::Fixed(a) => Angle::Fixed(scale * a + shift),
            Angle::Param(p) => Angle::Param(ParamExpr {
                index: p.index,
                coefficient: scale * p.coefficient,
                offset: scale * p.offset + shift,
            }),
        }
    }

    pub fn param_expr(&self) -> Option<&ParamExpr> {
        match self {
            Angle::Param(p) => Some(p),
            Angle::Fixed(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub angle: Option<Angle>,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: &[usize]) -> Self {
        Self {
            kind,
            targets: targets.to_vec(),
            angle: None,
        }
    }

    pub fn with_angle(kind: GateKind, targets: &[usize], angle: Angle) -> Self {
        Self {
            kind,
            targets: targets.to_vec(),
            angle: Some(angle),
        }
    }

    fn validate(&self, n_qubits: usize, n_params: usize) -> Result<()> {
        let arity = self.kind.arity();
        if self.targets.len() != arity {
            return Err(Error::Arity {
                gate: self.kind.name(),
                expected: arity,
                got: self.targets.len(),
            });
        }
        for &t in &self.targets {
            if t >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: t,
                    n_qubits,
                });
            }
        }
        if arity == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::DuplicateTargets(self.targets.clone()));
        }
        match (&self.angle, self.kind.is_parametric()) {
            (None, true) => return Err(Error::MissingAngle(self.kind.name())),
            (Some(Angle::Param(p)), _) if p.index >= n_params => {
                return Err(Error::UnboundParameter {
                    index: p.index,
                    len: n_params,
                })
            }
            _ => {}
        }
        Ok(())
    }

    pub fn inverse(&self) -> GateOp {
        let kind = match self.kind {
            GateKind::XHalf => GateKind::XHalfDag,
            GateKind::XHalfDag => GateKind::XHalf,
            k => k,
        };
        GateOp {
            kind,
            targets: self.targets.clone(),
            angle: self.angle.map(|a| a.affine(-1.0, 0.0)),
        }
    }
}

/// Ordered gate list over `n_qubits` wires, referencing `n_params` parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_params: usize) -> Self {
        Self {
            n_qubits,
            n_params,
            ops: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.n_qubits, self.n_params)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn gate(&mut self, kind: GateKind, targets: &[usize]) -> Result<&mut Self> {
        self.push(GateOp::new(kind, targets))?;
        Ok(self)
    }

    pub fn rotation(&mut self, kind: GateKind, targets: &[usize], angle: Angle) -> Result<&mut Self> {
        self.push(GateOp::with_angle(kind, targets, angle))?;
        Ok(self)
    }

    /// Append `other`; its parameter indices are kept as-is.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: other.n_qubits.saturating_sub(1),
                n_qubits: self.n_qubits,
            });
        }
        self.n_params = self.n_params.max(other.n_params);
        for op in &other.ops {
            self.push(op.clone())?;
        }
        Ok(())
    }

    pub fn with_n_params(mut self, n_params: usize) -> Result<Self> {
        for op in &self.ops {
            op.validate(self.n_qubits, n_params)?;
        }
        self.n_params = n_params;
        Ok(self)
    }

    /// Reversed circuit with every gate inverted.
    pub fn invert(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            n_params: self.n_params,
            ops: self.ops.iter().rev().map(GateOp::inverse).collect(),
        }
    }

    /// Concrete angle per op (None for fixed gates without an angle).
    pub fn bind(&self, theta: &[f64]) -> Result<Vec<Option<f64>>> {
        if theta.len() != self.n_params {
            return Err(Error::ParameterLength {
                expected: self.n_params,
                got: theta.len(),
            });
        }
        self.ops
            .iter()
            .map(|op| op.angle.as_ref().map(|a| a.eval(theta)).transpose())
            .collect()
    }

    /// Same gates with NH/NI blocks expanded into CNOTs and rotations.
    pub fn lowered(&self) -> Circuit {
        let mut out = Circuit::new(self.n_qubits, self.n_params);
        for op in &self.ops {
            match op.kind {
                GateKind::Nh | GateKind::Ni => {
                    let angle = op.angle.expect("validated");
                    let (a, b) = (op.targets[0], op.targets[1]);
                    let block = if op.kind == GateKind::Nh {
                        decompose_nh(a, b, angle)
                    } else {
                        decompose_ni(a, b, angle)
                    };
                    out.ops.extend(block);
                }
                _ => out.ops.push(op.clone()),
            }
        }
        out
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.ops.iter().filter(|op| op.kind == kind).count()
    }

    /// CNOTs after lowering: NH blocks cost 3, NI blocks 2.
    pub fn cnot_count(&self) -> usize {
        self.ops
            .iter()
            .map(|op| match op.kind {
                GateKind::Cnot => 1,
                GateKind::Nh => 3,
                GateKind::Ni => 2,
                _ => 0,
            })
            .sum()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.ops.iter().filter(|op| op.kind.arity() == 2).count()
    }

    /// Ops that carry a parameter reference, as `(op index, expr)`.
    pub fn parametric_ops(&self) -> impl Iterator<Item = (usize, &ParamExpr)> {
        self.ops
            .iter()
            .enumerate()
            .filter_map(|(i, op)| op.angle.as_ref().and_then(|a| a.param_expr()).map(|p| (i, p)))
    }

    pub fn to_text(&self) -> String {
        text::to_text(self)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub const UNITARY_QUBIT_LIMIT: usize = 6;

/// Dense unitary of the bound circuit, built column by column.
pub fn circuit_unitary(circ: &Circuit, theta: &[f64]) -> Result<CMatrix> {
    if circ.n_qubits() > UNITARY_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n_qubits: circ.n_qubits(),
            limit: UNITARY_QUBIT_LIMIT,
        });
    }
    let angles = circ.bind(theta)?;
    let dim = 1usize << circ.n_qubits();
    let mut u = identity(dim);
    for col in 0..dim {
        let mut state = QuantumState::basis(circ.n_qubits(), col);
        state.apply_bound(circ, &angles);
        let amps = state.amplitudes().expect("pure");
        for (row, a) in amps.iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}
