//! Symmetry-preserving variational spectroscopy of spin chains.
//!
//! The crate bundles a dense state-vector and density-matrix simulator, a
//! small gate IR with tied symbolic parameters, Heisenberg and transverse-field
//! Ising Hamiltonians, symmetry-preserving ansatz builders, subspace-search
//! costs, optimizers, zero-noise extrapolation and an isomorphic-waveform pulse
//! compiler.
//!
//! Qubit `i` is bit `n - 1 - i` of a basis index (qubit 0 is the leftmost
//! character of a bitstring) and `Z|0⟩ = +|0⟩`, so `|0⟩` is spin up.

pub mod ansatz;
pub mod catalog;
pub mod circuit;
pub mod compile;
pub mod cost;
mod error;
pub mod hamiltonians;
pub mod initstates;
pub mod linalg;
pub mod noise;
pub mod optim;
pub mod pauli;
pub mod sim;
pub mod zne;

pub use num_complex::Complex64 as C64;

pub use ansatz::{build_ansatz, AnsatzSpec, ParamLayout, Symmetry, Tie};
pub use circuit::{circuit_unitary, Angle, Circuit, GateKind, GateOp, ParamExpr};
pub use cost::{Backend, CostSpec, Penalty};
pub use error::{Error, Result};
pub use hamiltonians::{Model, QuantumNumbers, SymmetryOps};
pub use noise::NoiseModel;
pub use pauli::{Pauli, PauliString, PauliSum};
pub use sim::{HalfInt, MeasurementHistogram, QuantumState};
