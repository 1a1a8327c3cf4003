//! Model Hamiltonians, symmetry operators and eigenstate labeling.

use serde::{Deserialize, Serialize};

use crate::linalg::{eigh, inner, CMatrix};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::sim::{HalfInt, QuantumState, MAX_QUBITS};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Heisenberg,
    Ising,
}

fn two_site(n: usize, i: usize, p: Pauli) -> PauliString {
    PauliString::from_sparse(n, &[(i, p), (i + 1, p)])
}

/// Open chain `J Σᵢ (XᵢXᵢ₊₁ + YᵢYᵢ₊₁ + ZᵢZᵢ₊₁)`.
pub fn heisenberg_chain(n: usize, j: f64) -> Result<PauliSum> {
    if n < 2 {
        return Err(Error::ChainTooShort(n));
    }
    let terms = (0..n - 1).flat_map(|i| [Pauli::X, Pauli::Y, Pauli::Z].map(|p| (j, two_site(n, i, p))));
    Ok(PauliSum::from_real_terms(n, terms))
}

/// Open chain `J Σᵢ XᵢXᵢ₊₁ + h Σᵢ Zᵢ`.
pub fn transverse_ising_chain(n: usize, j: f64, h: f64) -> Result<PauliSum> {
    if n < 2 {
        return Err(Error::ChainTooShort(n));
    }
    let bonds = (0..n - 1).map(|i| (j, two_site(n, i, Pauli::X)));
    let field = (0..n).map(|i| (h, PauliString::from_sparse(n, &[(i, Pauli::Z)])));
    Ok(PauliSum::from_real_terms(n, bonds.chain(field)))
}

pub fn chain(model: Model, n: usize, j: f64, h: f64) -> Result<PauliSum> {
    match model {
        Model::Heisenberg => heisenberg_chain(n, j),
        Model::Ising => transverse_ising_chain(n, j, h),
    }
}

/// Ascending eigenvalues and the matching eigenvectors (columns).
pub fn exact_spectrum(h: &PauliSum) -> Result<(Vec<f64>, CMatrix)> {
    if h.n_qubits() > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits: h.n_qubits(),
            limit: MAX_QUBITS,
        });
    }
    if let Some(s) = h.non_hermitian_term() {
        return Err(Error::NonHermitian(s.to_string()));
    }
    Ok(eigh(&h.to_matrix()))
}

/// Reverse the bit order of a basis index, `|b₁…b_N⟩ → |b_N…b₁⟩`.
pub fn mirror_index(index: usize, n_qubits: usize) -> usize {
    index.reverse_bits() >> (usize::BITS as usize - n_qubits)
}

/// `M|ψ⟩` for the chain mirror.
pub fn mirror_apply(amps: &[C64]) -> Vec<C64> {
    let n = amps.len().trailing_zeros() as usize;
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for (b, a) in amps.iter().enumerate() {
        out[mirror_index(b, n)] = *a;
    }
    out
}

/// Symmetry operators of an `n`-site chain.
#[derive(Clone, Debug)]
pub struct SymmetryOps {
    pub n_qubits: usize,
    /// `½ Σ Zᵢ`.
    pub s_z: PauliSum,
    /// `S_x² + S_y² + S_z²`.
    pub s_tot2: PauliSum,
    /// `⊗ Zᵢ`.
    pub parity_z: PauliSum,
}

impl SymmetryOps {
    pub fn new(n: usize) -> Self {
        let s_z = PauliSum::from_real_terms(
            n,
            (0..n).map(|q| (0.5, PauliString::from_sparse(n, &[(q, Pauli::Z)]))),
        );
        let mut pairs = vec![(0.75 * n as f64, PauliString::identity(n))];
        for i in 0..n {
            for j in i + 1..n {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    pairs.push((0.5, PauliString::from_sparse(n, &[(i, p), (j, p)])));
                }
            }
        }
        let s_tot2 = PauliSum::from_real_terms(n, pairs);
        let parity_z = PauliSum::from_real_terms(n, [(1.0, PauliString::new(vec![Pauli::Z; n]))]);
        Self {
            n_qubits: n,
            s_z,
            s_tot2,
            parity_z,
        }
    }

    /// Dense permutation matrix of the mirror.
    pub fn mirror_matrix(&self) -> CMatrix {
        let d = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(d, d);
        for b in 0..d {
            m[(mirror_index(b, self.n_qubits), b)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// `(S_tot² − s(s+1))²` expanded as a Pauli sum.
    pub fn s_tot2_deviation_squared(&self, target: f64) -> PauliSum {
        let shifted = &self.s_tot2 + &PauliSum::identity(self.n_qubits, -target);
        &shifted * &shifted
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumNumbers {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<HalfInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_z: Option<HalfInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_z: Option<i8>,
}

const QN_TOL: f64 = 1e-4;

fn sharp(label: &str, value: f64, allowed: f64) -> Result<()> {
    if (value - allowed).abs() > QN_TOL {
        return Err(Error::NotSymmetryEigenstate(format!(
            "⟨{label}⟩ = {value} is not an eigenvalue"
        )));
    }
    Ok(())
}

fn sign_of(label: &str, value: f64) -> Result<i8> {
    let s = if value >= 0.0 { 1 } else { -1 };
    sharp(label, value, s as f64)?;
    Ok(s)
}

fn mirror_expectation(state: &QuantumState) -> f64 {
    match state.amplitudes() {
        Some(v) => inner(v, &mirror_apply(v)).re,
        None => {
            let rho = state.density_matrix();
            let n = state.n_qubits();
            (0..rho.nrows())
                .map(|b| rho[(b, mirror_index(b, n))].re)
                .sum()
        }
    }
}

/// Read off the conserved quantum numbers of a symmetry eigenstate.
///
/// Heisenberg states report `s`, `s_z` and `m`; Ising states report `π_z` and `m`.
pub fn quantum_numbers(state: &QuantumState, model: Model) -> Result<QuantumNumbers> {
    let ops = SymmetryOps::new(state.n_qubits());
    let m = sign_of("M", mirror_expectation(state))?;
    match model {
        Model::Heisenberg => {
            let s2 = state.expectation(&ops.s_tot2)?;
            let s_cont = (-1.0 + (1.0 + 4.0 * s2.max(0.0)).sqrt()) / 2.0;
            let s = HalfInt::round(s_cont);
            sharp("S²", s2, s.value() * (s.value() + 1.0))?;
            let sz_val = state.expectation(&ops.s_z)?;
            let s_z = HalfInt::round(sz_val);
            sharp("S_z", sz_val, s_z.value())?;
            Ok(QuantumNumbers {
                s: Some(s),
                s_z: Some(s_z),
                m: Some(m),
                pi_z: None,
            })
        }
        Model::Ising => {
            let pi_z = sign_of("Π_z", state.expectation(&ops.parity_z)?)?;
            Ok(QuantumNumbers {
                s: None,
                s_z: None,
                m: Some(m),
                pi_z: Some(pi_z),
            })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledLevel {
    pub index: usize,
    pub energy: f64,
    #[serde(flatten)]
    pub numbers: QuantumNumbers,
}

const DEGENERACY_TOL: f64 = 1e-8;

fn group_by_value(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i] - values[start]).abs() > tol {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

/// Rotate the columns of `block` so that each operator is diagonal within every
/// previously separated subspace, applying the operators in order.
fn refine(block: Vec<Vec<C64>>, ops: &[&dyn Fn(&[C64]) -> Vec<C64>]) -> Vec<Vec<C64>> {
    let Some((op, rest)) = ops.split_first() else {
        return block;
    };
    if block.len() == 1 {
        return refine(block, rest);
    }
    let k = block.len();
    let images: Vec<Vec<C64>> = block.iter().map(|v| op(v)).collect();
    let a = CMatrix::from_fn(k, k, |r, c| inner(&block[r], &images[c]));
    let a = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let (vals, w) = eigh(&a);
    let rotated: Vec<Vec<C64>> = (0..k)
        .map(|col| {
            let mut v = vec![C64::new(0.0, 0.0); block[0].len()];
            for (r, b) in block.iter().enumerate() {
                let coef = w[(r, col)];
                for (x, y) in v.iter_mut().zip(b) {
                    *x += coef * y;
                }
            }
            v
        })
        .collect();
    let mut out = Vec::with_capacity(k);
    for g in group_by_value(&vals, 1e-6) {
        out.extend(refine(rotated[g].to_vec(), rest));
    }
    out
}

/// Full spectrum with quantum-number labels.
///
/// Degenerate eigenspaces are split by `S_z`, then `S_tot²`, then `M` (Heisenberg)
/// or by `Π_z`, then `M` (Ising) before labeling.
pub fn labeled_spectrum(model: Model, h: &PauliSum) -> Result<Vec<LabeledLevel>> {
    let n = h.n_qubits();
    let (values, vectors) = exact_spectrum(h)?;
    let ops = SymmetryOps::new(n);
    let sz = |v: &[C64]| ops.s_z.apply(v);
    let s2 = |v: &[C64]| ops.s_tot2.apply(v);
    let pz = |v: &[C64]| ops.parity_z.apply(v);
    let mirror = |v: &[C64]| mirror_apply(v);
    let chain: Vec<&dyn Fn(&[C64]) -> Vec<C64>> = match model {
        Model::Heisenberg => vec![&sz, &s2, &mirror],
        Model::Ising => vec![&pz, &mirror],
    };
    let mut levels = Vec::with_capacity(values.len());
    for g in group_by_value(&values, DEGENERACY_TOL) {
        let block: Vec<Vec<C64>> = g
            .clone()
            .map(|c| vectors.column(c).iter().copied().collect())
            .collect();
        for (offset, v) in refine(block, &chain).into_iter().enumerate() {
            let idx = g.start + offset;
            let state = QuantumState::normalized(v);
            levels.push(LabeledLevel {
                index: idx,
                energy: values[idx],
                numbers: quantum_numbers(&state, model)?,
            });
        }
    }
    Ok(levels)
}

/// Distinct eigenvalues (merged within `tol`), ascending.
pub fn distinct_levels(values: &[f64], tol: f64) -> Vec<f64> {
    group_by_value(values, tol)
        .into_iter()
        .map(|g| values[g.start])
        .collect()
}
