//! Dense pure-state and density-matrix simulation.
//!
//! A density matrix is stored row-major as a `2^n × 2^n` array and treated as a
//! `2n`-qubit vector: a gate `U` on qubit `q` acts as `U` on "row qubit" `q` and
//! `conj(U)` on "column qubit" `n + q`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{matrix_1q, matrix_2q, Circuit, GateOp, Mat2, Mat4};
use crate::linalg::CMatrix;
use crate::pauli::{i_pow, PauliSum};
use crate::{Error, Result, C64};

pub const MAX_QUBITS: usize = 10;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Pure(Vec<C64>),
    Mixed(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    repr: Repr,
}

/// Half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt(i32);

impl HalfInt {
    pub fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub fn from_int(v: i32) -> Self {
        Self(2 * v)
    }

    /// Nearest half-integer to `x`.
    pub fn round(x: f64) -> Self {
        Self((2.0 * x).round() as i32)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementHistogram {
    pub n_qubits: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl MeasurementHistogram {
    pub fn retained(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn retention_ratio(&self) -> f64 {
        self.retained() as f64 / self.shots as f64
    }

    /// Counts indexed by basis state.
    pub fn count_vector(&self) -> Vec<u64> {
        let mut v = vec![0; 1 << self.n_qubits];
        for (k, c) in &self.counts {
            v[usize::from_str_radix(k, 2).expect("bitstring key")] += c;
        }
        v
    }
}

/// Keep only outcomes whose magnetization `(n₀ − n₁)/2` equals `target`.
///
/// The `shots` field is left untouched so the retention ratio stays observable.
pub fn postselect_sz(hist: &MeasurementHistogram, target: HalfInt) -> MeasurementHistogram {
    let counts = hist
        .counts
        .iter()
        .filter(|(k, _)| {
            let ones = k.bytes().filter(|&b| b == b'1').count() as i32;
            k.len() as i32 - 2 * ones == target.twice()
        })
        .map(|(k, &c)| (k.clone(), c))
        .collect();
    MeasurementHistogram {
        n_qubits: hist.n_qubits,
        shots: hist.shots,
        counts,
    }
}

pub fn bitstring(index: usize, n_qubits: usize) -> String {
    format!("{index:0n_qubits$b}")
}

/// Twice the magnetization of a basis index, `n₀ − n₁`.
pub fn twice_sz_of(index: usize, n_qubits: usize) -> i32 {
    n_qubits as i32 - 2 * index.count_ones() as i32
}

#[inline]
fn apply_1q_vec(v: &mut [C64], bit: usize, m: &Mat2) {
    let stride = 1usize << bit;
    let len = v.len();
    let mut base = 0;
    while base < len {
        for i in base..base + stride {
            let a0 = v[i];
            let a1 = v[i + stride];
            v[i] = m[0][0] * a0 + m[0][1] * a1;
            v[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * stride;
    }
}

#[inline]
fn apply_2q_vec(v: &mut [C64], bit0: usize, bit1: usize, m: &Mat4) {
    let m0 = 1usize << bit0;
    let m1 = 1usize << bit1;
    for i in 0..v.len() {
        if i & (m0 | m1) != 0 {
            continue;
        }
        let idx = [i, i | m1, i | m0, i | m0 | m1];
        let a = [v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]];
        for r in 0..4 {
            v[idx[r]] = m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
        }
    }
}

fn conj2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}

fn conj4(m: &Mat4) -> Mat4 {
    let mut c = *m;
    for row in c.iter_mut() {
        for z in row.iter_mut() {
            *z = z.conj();
        }
    }
    c
}

impl QuantumState {
    fn check_size(n_qubits: usize) {
        assert!(
            n_qubits <= MAX_QUBITS,
            "dense simulation is limited to {MAX_QUBITS} qubits"
        );
    }

    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        Self::check_size(n_qubits);
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self {
            n_qubits,
            repr: Repr::Pure(amps),
        }
    }

    /// Pure state from amplitudes; the norm must be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = amps.len().trailing_zeros() as usize;
        if !amps.len().is_power_of_two() || n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                limit: MAX_QUBITS,
            });
        }
        let norm = crate::linalg::norm(&amps);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotSymmetryEigenstate(format!(
                "amplitudes have norm {norm}"
            )));
        }
        Ok(Self {
            n_qubits,
            repr: Repr::Pure(amps),
        })
    }

    /// Normalizes `amps` before wrapping them.
    pub fn normalized(mut amps: Vec<C64>) -> Self {
        let norm = crate::linalg::norm(&amps);
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Self::from_amplitudes(amps).expect("normalized")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&[C64]> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn into_amplitudes(self) -> Option<Vec<C64>> {
        match self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    /// `|ψ⟩⟨ψ|` for a pure state; a copy for a mixed one.
    pub fn to_mixed(&self) -> Self {
        match &self.repr {
            Repr::Mixed(_) => self.clone(),
            Repr::Pure(v) => {
                let d = v.len();
                let mut rho = vec![ZERO; d * d];
                for r in 0..d {
                    for c in 0..d {
                        rho[r * d + c] = v[r] * v[c].conj();
                    }
                }
                Self {
                    n_qubits: self.n_qubits,
                    repr: Repr::Mixed(rho),
                }
            }
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        let d = self.dim();
        match &self.to_mixed().repr {
            Repr::Mixed(rho) => CMatrix::from_row_slice(d, d, rho),
            Repr::Pure(_) => unreachable!(),
        }
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for &t in targets {
            if t >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: t,
                    n_qubits: self.n_qubits,
                });
            }
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::DuplicateTargets(targets.to_vec()));
        }
        Ok(())
    }

    fn bit(&self, q: usize) -> usize {
        self.n_qubits - 1 - q
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let bit = self.bit(q);
        let n = self.n_qubits;
        match &mut self.repr {
            Repr::Pure(v) => apply_1q_vec(v, bit, m),
            Repr::Mixed(rho) => {
                apply_1q_vec(rho, bit + n, m);
                apply_1q_vec(rho, bit, &conj2(m));
            }
        }
    }

    pub fn apply_2q(&mut self, q0: usize, q1: usize, m: &Mat4) {
        let (b0, b1) = (self.bit(q0), self.bit(q1));
        let n = self.n_qubits;
        match &mut self.repr {
            Repr::Pure(v) => apply_2q_vec(v, b0, b1, m),
            Repr::Mixed(rho) => {
                apply_2q_vec(rho, b0 + n, b1 + n, m);
                apply_2q_vec(rho, b0, b1, &conj4(m));
            }
        }
    }

    fn apply_op_angle(&mut self, op: &GateOp, angle: f64) {
        match op.targets.as_slice() {
            [q] => self.apply_1q(*q, &matrix_1q(op.kind, angle)),
            [a, b] => self.apply_2q(*a, *b, &matrix_2q(op.kind, angle)),
            _ => unreachable!("validated arity"),
        }
    }

    /// Apply one gate, binding its parameter (if any) against `theta`.
    pub fn apply_gate(&mut self, op: &GateOp, theta: &[f64]) -> Result<()> {
        if op.targets.len() != op.kind.arity() {
            return Err(Error::Arity {
                gate: op.kind.name(),
                expected: op.kind.arity(),
                got: op.targets.len(),
            });
        }
        self.check_targets(&op.targets)?;
        let angle = match (&op.angle, op.kind.is_parametric()) {
            (Some(a), _) => a.eval(theta)?,
            (None, true) => return Err(Error::MissingAngle(op.kind.name())),
            (None, false) => 0.0,
        };
        self.apply_op_angle(op, angle);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circ: &Circuit, theta: &[f64]) -> Result<()> {
        if circ.n_qubits() != self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: circ.n_qubits().saturating_sub(1),
                n_qubits: self.n_qubits,
            });
        }
        let angles = circ.bind(theta)?;
        self.apply_bound(circ, &angles);
        Ok(())
    }

    /// Apply with pre-bound angles (one per op, from [`Circuit::bind`]).
    pub fn apply_bound(&mut self, circ: &Circuit, angles: &[Option<f64>]) {
        for (op, a) in circ.ops().iter().zip(angles) {
            self.apply_op_angle(op, a.unwrap_or(0.0));
        }
    }

    /// Depolarize qubit `q`: with probability `p` a uniformly random non-identity Pauli.
    pub fn depolarize_1q(&mut self, q: usize, p: f64) {
        self.depolarize(&[q], p * 4.0 / 3.0);
    }

    /// Two-qubit depolarizing with probability `p` over the 15 non-identity Paulis.
    pub fn depolarize_2q(&mut self, a: usize, b: usize, p: f64) {
        self.depolarize(&[a, b], p * 16.0 / 15.0);
    }

    /// `ρ → (1−λ)ρ + λ · I/d ⊗ Tr_S ρ` on the qubit subset `S`.
    fn depolarize(&mut self, qubits: &[usize], lambda: f64) {
        if lambda == 0.0 {
            return;
        }
        if self.is_pure() {
            *self = self.to_mixed();
        }
        let n = self.n_qubits;
        let d = self.dim();
        let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << (n - 1 - q)).collect();
        let sub: usize = masks.iter().sum();
        let k = 1usize << qubits.len();
        let spread = |s: usize| -> usize {
            masks
                .iter()
                .enumerate()
                .filter(|(j, _)| s >> (masks.len() - 1 - j) & 1 == 1)
                .map(|(_, m)| m)
                .sum()
        };
        let offsets: Vec<usize> = (0..k).map(spread).collect();
        let Repr::Mixed(rho) = &mut self.repr else {
            unreachable!()
        };
        let inv_k = 1.0 / k as f64;
        for r0 in (0..d).filter(|r| r & sub == 0) {
            for c0 in (0..d).filter(|c| c & sub == 0) {
                let traced: C64 = offsets.iter().map(|&o| rho[(r0 | o) * d + (c0 | o)]).sum();
                for &or in &offsets {
                    for &oc in &offsets {
                        let z = &mut rho[(r0 | or) * d + (c0 | oc)];
                        *z *= 1.0 - lambda;
                        if or == oc {
                            *z += lambda * inv_k * traced;
                        }
                    }
                }
            }
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Pure(v) => v.iter().map(|z| z.norm_sqr()).sum(),
            Repr::Mixed(rho) => {
                let d = self.dim();
                (0..d).map(|i| rho[i * d + i].re).sum()
            }
        }
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 1.0,
            Repr::Mixed(rho) => rho.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// `⟨ψ|φ⟩|²` for pure `φ`, or `⟨φ|ρ|φ⟩`.
    pub fn fidelity_with(&self, target: &[C64]) -> f64 {
        match &self.repr {
            Repr::Pure(v) => crate::linalg::inner(target, v).norm_sqr(),
            Repr::Mixed(rho) => {
                let d = self.dim();
                let mut acc = ZERO;
                for r in 0..d {
                    for c in 0..d {
                        acc += target[r].conj() * rho[r * d + c] * target[c];
                    }
                }
                acc.re
            }
        }
    }

    /// Computational-basis probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            Repr::Mixed(rho) => {
                let d = self.dim();
                (0..d).map(|i| rho[i * d + i].re.max(0.0)).collect()
            }
        }
    }

    /// `⟨O⟩`; observables narrower than the register act on its leading qubits.
    pub fn expectation(&self, observable: &PauliSum) -> Result<f64> {
        if observable.n_qubits() > self.n_qubits {
            return Err(Error::ObservableSize {
                observable: observable.n_qubits(),
                state: self.n_qubits,
            });
        }
        if let Some(s) = observable.non_hermitian_term() {
            return Err(Error::NonHermitian(s.to_string()));
        }
        let shift = self.n_qubits - observable.n_qubits();
        let d = self.dim();
        let mut total = 0.0;
        for (c, s) in observable.terms() {
            let (x, z, ny) = s.masks();
            let (x, z) = (x << shift, z << shift);
            let phase = i_pow(ny);
            let mut acc = ZERO;
            match &self.repr {
                Repr::Pure(v) => {
                    for (b, a) in v.iter().enumerate() {
                        let t = v[b ^ x].conj() * a;
                        if (b & z).count_ones() % 2 == 0 {
                            acc += t;
                        } else {
                            acc -= t;
                        }
                    }
                }
                Repr::Mixed(rho) => {
                    for b in 0..d {
                        let t = rho[b * d + (b ^ x)];
                        if (b & z).count_ones() % 2 == 0 {
                            acc += t;
                        } else {
                            acc -= t;
                        }
                    }
                }
            }
            total += (c * phase * acc).re;
        }
        Ok(total)
    }

    /// Draw `shots` computational-basis outcomes, deterministic in `seed`.
    pub fn sample(&self, shots: u64, seed: u64) -> MeasurementHistogram {
        sample_probabilities(&self.probabilities(), self.n_qubits, shots, seed)
    }
}

/// Sample outcome counts from an explicit probability vector.
pub fn sample_probabilities(
    probs: &[f64],
    n_qubits: usize,
    shots: u64,
    seed: u64,
) -> MeasurementHistogram {
    assert!(shots > 0, "shots must be positive");
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let i = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[i] += 1;
    }
    MeasurementHistogram {
        n_qubits,
        shots,
        counts: counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (bitstring(i, n_qubits), c))
            .collect(),
    }
}
