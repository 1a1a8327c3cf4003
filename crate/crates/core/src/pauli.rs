//! Pauli strings and weighted Pauli sums.
//!
//! Qubit `i` of an `n`-qubit string maps to bit `n - 1 - i` of a basis index,
//! so qubit 0 is the leftmost character of a bitstring.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Product `self · other` as `(i^phase, pauli)`.
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; `ops[i]` acts on qubit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            ops: vec![Pauli::I; n_qubits],
        }
    }

    pub fn new(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    /// String with the given Paulis on the listed qubits and identity elsewhere.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n_qubits);
        for &(q, p) in ops {
            s.ops[q] = p;
        }
        s
    }

    pub fn parse(text: &str) -> Option<Self> {
        text.chars()
            .map(|c| match c {
                'I' => Some(Pauli::I),
                'X' => Some(Pauli::X),
                'Y' => Some(Pauli::Y),
                'Z' => Some(Pauli::Z),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks `(x, z, y_count)` in basis-index space.
    ///
    /// `P|b⟩ = i^{y_count} (−1)^{|b ∧ z|} |b ⊕ x⟩`.
    pub fn masks(&self) -> (usize, usize, u32) {
        let n = self.ops.len();
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (q, &p) in self.ops.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    /// Product of two strings, returned with its `i^k` phase.
    pub fn product(&self, other: &PauliString) -> (C64, PauliString) {
        assert_eq!(self.n_qubits(), other.n_qubits());
        let mut phase = 0u8;
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (k, p) = a.mul(b);
                phase = (phase + k) % 4;
                p
            })
            .collect();
        (i_pow(phase as u32), PauliString { ops })
    }

    /// Whether the two strings commute on every qubit individually.
    pub fn qubitwise_compatible(&self, basis: &[Pauli]) -> bool {
        self.ops
            .iter()
            .zip(basis)
            .all(|(&p, &b)| p == Pauli::I || b == Pauli::I || p == b)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.ops {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

pub(crate) fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Weighted sum of Pauli strings with merged, sorted terms.
///
/// Coefficients are stored as complex numbers so that operator products can be
/// expanded exactly; a Hermitian sum ends up with purely real coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(C64, PauliString)>,
}

const DROP_TOL: f64 = 1e-14;

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize, coefficient: f64) -> Self {
        Self::from_terms(
            n_qubits,
            [(C64::new(coefficient, 0.0), PauliString::identity(n_qubits))],
        )
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (C64, PauliString)>,
    {
        let mut merged: BTreeMap<PauliString, C64> = BTreeMap::new();
        for (c, s) in terms {
            assert_eq!(s.n_qubits(), n_qubits, "Pauli string width mismatch");
            assert!(c.re.is_finite() && c.im.is_finite(), "non-finite coefficient");
            *merged.entry(s).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() > DROP_TOL)
            .map(|(s, c)| (c, s))
            .collect();
        Self { n_qubits, terms }
    }

    pub fn from_real_terms<I>(n_qubits: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        Self::from_terms(
            n_qubits,
            terms.into_iter().map(|(c, s)| (C64::new(c, 0.0), s)),
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_terms(
            self.n_qubits,
            self.terms.iter().map(|(c, s)| (c * factor, s.clone())),
        )
    }

    /// First term whose coefficient has a non-negligible imaginary part.
    pub fn non_hermitian_term(&self) -> Option<&PauliString> {
        self.terms
            .iter()
            .find(|(c, _)| c.im.abs() > 1e-12 * c.norm().max(1.0))
            .map(|(_, s)| s)
    }

    pub fn is_hermitian(&self) -> bool {
        self.non_hermitian_term().is_none()
    }

    /// Coefficient of the identity string.
    pub fn trace_coefficient(&self) -> C64 {
        self.terms
            .iter()
            .find(|(_, s)| s.is_identity())
            .map(|(c, _)| *c)
            .unwrap_or_default()
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for (c, s) in &self.terms {
            let (x, z, ny) = s.masks();
            let base = c * i_pow(ny);
            for b in 0..dim {
                let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(b ^ x, b)] += base * sign;
            }
        }
        m
    }

    /// `P|ψ⟩` for the full sum.
    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (c, s) in &self.terms {
            let (x, z, ny) = s.masks();
            let base = c * i_pow(ny);
            for (b, a) in amps.iter().enumerate() {
                let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                out[b ^ x] += base * sign * a;
            }
        }
        out
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;

    fn add(self, rhs: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, rhs.n_qubits);
        PauliSum::from_terms(
            self.n_qubits,
            self.terms.iter().chain(&rhs.terms).cloned(),
        )
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;

    fn mul(self, rhs: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, rhs.n_qubits);
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ca, sa) in &self.terms {
            for (cb, sb) in &rhs.terms {
                let (phase, s) = sa.product(sb);
                out.push((ca * cb * phase, s));
            }
        }
        PauliSum::from_terms(self.n_qubits, out)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, s)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}*{}", c.re, s)?;
            } else {
                write!(f, "({})*{}", c, s)?;
            }
        }
        Ok(())
    }
}
