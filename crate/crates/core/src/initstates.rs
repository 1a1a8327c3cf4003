//! Initial-state library: closed-form targets and preparation circuits.
//!
//! Labels have the form `<model><n>/<state>[/<s_z>]`, e.g. `heis4/S1`,
//! `heis4/T2/+1`, `heis4/Q/0`, `heis8/T1/0`, `ising8/E2`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::circuit::{Angle, Circuit, GateKind};
use crate::hamiltonians::Model;
use crate::linalg::canonical_phase;
use crate::sim::QuantumState;
use crate::{Error, Result, C64};

/// Every label the library knows, in table order.
pub fn all_labels() -> Vec<String> {
    let mut v: Vec<String> = ["heis4/S1", "heis4/S2", "heis4/S2a", "heis4/S2b"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for t in 1..=3 {
        for sz in ["+1", "0", "-1"] {
            v.push(format!("heis4/T{t}/{sz}"));
        }
    }
    for sz in ["+2", "+1", "0", "-1", "-2"] {
        v.push(format!("heis4/Q/{sz}"));
    }
    v.push("heis8/S1".into());
    for t in 1..=2 {
        for sz in ["+1", "0", "-1"] {
            v.push(format!("heis8/T{t}/{sz}"));
        }
    }
    for n in [4, 8] {
        for e in 1..=3 {
            v.push(format!("ising{n}/E{e}"));
        }
    }
    v
}

/// Parsed label: model, chain length and the remaining path segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateLabel {
    pub model: Model,
    pub n_qubits: usize,
    pub state: String,
    pub sz: Option<i32>,
}

impl StateLabel {
    pub fn parse(label: &str) -> Result<Self> {
        let unknown = || Error::UnknownLabel(label.to_string());
        if !all_labels().iter().any(|l| l == label) {
            return Err(unknown());
        }
        let mut parts = label.split('/');
        let head = parts.next().ok_or_else(unknown)?;
        let (model, n) = if let Some(n) = head.strip_prefix("heis") {
            (Model::Heisenberg, n)
        } else if let Some(n) = head.strip_prefix("ising") {
            (Model::Ising, n)
        } else {
            return Err(unknown());
        };
        let n_qubits = n.parse().map_err(|_| unknown())?;
        let state = parts.next().ok_or_else(unknown)?.to_string();
        let sz = parts
            .next()
            .map(|s| s.trim_start_matches('+').parse::<i32>().map_err(|_| unknown()))
            .transpose()?;
        Ok(Self {
            model,
            n_qubits,
            state,
            sz,
        })
    }
}

fn amp(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// State with real amplitudes on the listed bitstrings (qubit 0 leftmost), normalized.
fn superposition(n: usize, terms: &[(&str, f64)]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << n];
    for (bits, c) in terms {
        assert_eq!(bits.len(), n);
        v[usize::from_str_radix(bits, 2).expect("bitstring")] += amp(*c);
    }
    let norm = crate::linalg::norm(&v);
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pair {
    Singlet,
    TripletZero,
    Up,
    Down,
}

impl Pair {
    fn amplitudes(self) -> [f64; 4] {
        let h = FRAC_1_SQRT_2;
        match self {
            Pair::Singlet => [0.0, h, -h, 0.0],
            Pair::TripletZero => [0.0, h, h, 0.0],
            Pair::Up => [1.0, 0.0, 0.0, 0.0],
            Pair::Down => [0.0, 0.0, 0.0, 1.0],
        }
    }

    fn prepare(self, c: &mut Circuit, a: usize) -> Result<()> {
        let b = a + 1;
        match self {
            Pair::Singlet => {
                c.gate(GateKind::X, &[a])?.gate(GateKind::X, &[b])?;
                c.gate(GateKind::H, &[a])?.gate(GateKind::Cnot, &[a, b])?;
            }
            Pair::TripletZero => {
                c.gate(GateKind::X, &[b])?;
                c.gate(GateKind::H, &[a])?.gate(GateKind::Cnot, &[a, b])?;
            }
            Pair::Up => {}
            Pair::Down => {
                c.gate(GateKind::X, &[a])?.gate(GateKind::X, &[b])?;
            }
        }
        Ok(())
    }
}

fn pair_product(pairs: &[Pair]) -> Vec<C64> {
    let mut v = vec![amp(1.0)];
    for p in pairs {
        let a = p.amplitudes();
        v = v.iter().flat_map(|x| a.iter().map(move |y| x * y)).collect();
    }
    v
}

fn pair_circuit(pairs: &[Pair]) -> Result<Circuit> {
    let mut c = Circuit::new(2 * pairs.len(), 0);
    for (i, p) in pairs.iter().enumerate() {
        p.prepare(&mut c, 2 * i)?;
    }
    Ok(c)
}

fn heis8_pairs(label: &StateLabel) -> Vec<Pair> {
    let middle = match label.sz {
        Some(1) => Pair::Up,
        Some(-1) => Pair::Down,
        _ => Pair::TripletZero,
    };
    match label.state.as_str() {
        "S1" => vec![Pair::Singlet; 4],
        "T1" => vec![Pair::Singlet, middle, Pair::Singlet, Pair::Singlet],
        _ => vec![Pair::Singlet, Pair::Singlet, middle, Pair::Singlet],
    }
}

/// Sign pattern of the one-excitation triplet targets, qubits 0..3.
fn triplet_signs(t: usize) -> [f64; 4] {
    match t {
        1 => [-1.0, 1.0, -1.0, 1.0],
        2 => [1.0, -1.0, -1.0, 1.0],
        _ => [-1.0, -1.0, 1.0, 1.0],
    }
}

/// Qubits receiving a trailing `Z` in the excitation-cascade circuits.
fn triplet_trailing_z(t: usize, sz: i32) -> [usize; 2] {
    match (t, sz) {
        (1, 1) => [1, 3],
        (2, 1) => [1, 2],
        (3, 1) => [2, 3],
        (1, _) => [0, 2],
        (2, _) => [0, 3],
        _ => [0, 1],
    }
}

fn excitation_index(q: usize, sz: i32) -> usize {
    let one = 1usize << (3 - q);
    if sz > 0 {
        one
    } else {
        0b1111 ^ one
    }
}

fn triplet_number(state: &str) -> usize {
    state[1..].parse().expect("validated label")
}

/// Closed-form target state for `label`, first non-zero amplitude real positive.
pub fn target_statevector(label: &str) -> Result<QuantumState> {
    let l = StateLabel::parse(label)?;
    let n = l.n_qubits;
    let mut v = match (l.model, n, l.state.as_str()) {
        (Model::Heisenberg, 4, "S1") => pair_product(&[Pair::Singlet, Pair::Singlet]),
        (Model::Heisenberg, 4, "S2") => {
            let s = 3f64.sqrt() / 6.0;
            superposition(
                4,
                &[
                    ("0101", s),
                    ("1010", s),
                    ("0110", s),
                    ("1001", s),
                    ("1100", -2.0 * s),
                    ("0011", -2.0 * s),
                ],
            )
        }
        (Model::Heisenberg, 4, "S2a") => superposition(4, &[("0101", 1.0)]),
        (Model::Heisenberg, 4, "S2b") => superposition(4, &[("1010", 1.0)]),
        (Model::Heisenberg, 4, "Q") => {
            let bits = match l.sz {
                Some(2) => "0000",
                Some(1) => "0001",
                Some(0) => "0101",
                Some(-1) => "0111",
                _ => "1111",
            };
            superposition(4, &[(bits, 1.0)])
        }
        (Model::Heisenberg, 4, t) => {
            let t = triplet_number(t);
            match l.sz {
                Some(0) => {
                    let pair = match t {
                        1 => ("0101", "1010"),
                        2 => ("0110", "1001"),
                        _ => ("0011", "1100"),
                    };
                    superposition(4, &[(pair.0, 1.0), (pair.1, -1.0)])
                }
                Some(sz) => {
                    // Ordered by the excited (or flipped) qubit from the right end.
                    let signs = triplet_signs(t);
                    let mut v = vec![C64::new(0.0, 0.0); 16];
                    for q in 0..4 {
                        v[excitation_index(q, sz)] = amp(0.5 * signs[q]);
                    }
                    v
                }
                None => unreachable!(),
            }
        }
        (Model::Heisenberg, 8, _) => pair_product(&heis8_pairs(&l)),
        (Model::Ising, _, e) => {
            let bell = match e {
                "E1" => [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2],
                "E2" => [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0],
                _ => [0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0],
            };
            let shift = n / 2 - 1;
            let mut v = vec![C64::new(0.0, 0.0); 1 << n];
            for (k, a) in bell.iter().enumerate() {
                v[k << shift] = amp(*a);
            }
            v
        }
        _ => return Err(Error::UnknownLabel(label.to_string())),
    };
    canonical_phase(&mut v);
    QuantumState::from_amplitudes(v)
}

/// Angles `(a, b, c)` of the excitation cascade reproducing `target`.
///
/// `target[q]` is the amplitude of the single excitation on qubit `q`. The
/// cascade produces `(sin a, cos a sin b, cos a cos b sin c, cos a cos b cos c)`.
pub fn solve_cascade_angles(target: &[C64]) -> Result<[f64; 3]> {
    if target.len() != 4 {
        return Err(Error::Unreachable(format!(
            "cascade acts on 4 amplitudes, got {}",
            target.len()
        )));
    }
    if target.iter().any(|z| z.im.abs() > 1e-12) {
        return Err(Error::Unreachable("amplitudes must be real".into()));
    }
    let y: Vec<f64> = target.iter().map(|z| z.re).collect();
    let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Unreachable(format!("target has norm {norm}")));
    }
    let tail = |k: usize| y[k..].iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok([
        y[0].atan2(tail(1)),
        y[1].atan2(tail(2)),
        y[2].atan2(y[3]),
    ])
}

/// The single-excitation cascade with the given angles (5 CNOTs).
pub fn cascade_circuit(angles: [f64; 3]) -> Result<Circuit> {
    let [a, b, c] = angles;
    let mut circ = Circuit::new(4, 0);
    circ.gate(GateKind::X, &[0])?;
    circ.rotation(GateKind::Ry, &[1], Angle::Fixed(a))?;
    circ.gate(GateKind::X, &[1])?;
    circ.rotation(GateKind::Ry, &[1], Angle::Fixed(-a))?;
    circ.gate(GateKind::Cnot, &[1, 0])?;
    for (q, t) in [(2usize, b), (3, c)] {
        circ.rotation(GateKind::Ry, &[q], Angle::Fixed(t))?;
        circ.gate(GateKind::Cnot, &[q - 1, q])?;
        circ.rotation(GateKind::Ry, &[q], Angle::Fixed(-t))?;
        circ.gate(GateKind::Cnot, &[q, q - 1])?;
    }
    Ok(circ)
}

/// Preparation circuit acting on `|0…0⟩`.
pub fn init_circuit(label: &str) -> Result<Circuit> {
    let l = StateLabel::parse(label)?;
    let n = l.n_qubits;
    let xs = |qs: &[usize]| -> Result<Circuit> {
        let mut c = Circuit::new(n, 0);
        for &q in qs {
            c.gate(GateKind::X, &[q])?;
        }
        Ok(c)
    };
    match (l.model, n, l.state.as_str()) {
        (Model::Heisenberg, 4, "S1") => pair_circuit(&[Pair::Singlet, Pair::Singlet]),
        (Model::Heisenberg, 4, "S2") => Err(Error::NoCircuit(label.to_string())),
        (Model::Heisenberg, 4, "S2a") => xs(&[1, 3]),
        (Model::Heisenberg, 4, "S2b") => xs(&[0, 2]),
        (Model::Heisenberg, 4, "Q") => match l.sz {
            Some(2) => xs(&[]),
            Some(1) => xs(&[3]),
            Some(0) => xs(&[1, 3]),
            Some(-1) => xs(&[1, 2, 3]),
            _ => xs(&[0, 1, 2, 3]),
        },
        (Model::Heisenberg, 4, t) => {
            let t = triplet_number(t);
            let sz = l.sz.expect("validated label");
            if sz == 0 {
                let mut c = Circuit::new(4, 0);
                c.gate(GateKind::H, &[0])?;
                for q in 0..3 {
                    c.gate(GateKind::Cnot, &[q, q + 1])?;
                }
                c.gate(GateKind::Z, &[0])?;
                let flips: [usize; 2] = match t {
                    1 => [1, 3],
                    2 => [1, 2],
                    _ => [2, 3],
                };
                for q in flips {
                    c.gate(GateKind::X, &[q])?;
                }
                return Ok(c);
            }
            let target = target_statevector(label)?;
            let amps = target.amplitudes().expect("pure");
            let zs = triplet_trailing_z(t, sz);
            let pre: Vec<C64> = (0..4)
                .map(|q| {
                    let sign = if zs.contains(&q) { -1.0 } else { 1.0 };
                    amps[excitation_index(q, sz)] * sign
                })
                .collect();
            let mut c = cascade_circuit(solve_cascade_angles(&pre)?)?;
            for q in zs {
                c.gate(GateKind::Z, &[q])?;
            }
            if sz < 0 {
                for q in 0..4 {
                    c.gate(GateKind::X, &[q])?;
                }
            }
            Ok(c)
        }
        (Model::Heisenberg, 8, _) => pair_circuit(&heis8_pairs(&l)),
        (Model::Ising, _, e) => {
            let (a, b) = (n / 2 - 1, n / 2);
            let mut c = Circuit::new(n, 0);
            c.gate(GateKind::H, &[a])?;
            if e != "E1" {
                c.gate(GateKind::X, &[b])?;
            }
            c.gate(GateKind::Cnot, &[a, b])?;
            if e == "E2" {
                c.gate(GateKind::Z, &[a])?;
            }
            Ok(c)
        }
        _ => Err(Error::UnknownLabel(label.to_string())),
    }
}

/// Model of the chain a label belongs to.
pub fn label_model(label: &str) -> Result<Model> {
    StateLabel::parse(label).map(|l| l.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{heisenberg_chain, quantum_numbers};
    use crate::linalg::phase_aligned_vec_distance;
    use crate::sim::HalfInt;

    fn prepared(label: &str) -> Vec<C64> {
        let c = init_circuit(label).unwrap();
        let mut s = QuantumState::zero(c.n_qubits());
        s.apply_circuit(&c, &[]).unwrap();
        s.into_amplitudes().unwrap()
    }

    #[test]
    fn every_circuit_prepares_its_target() {
        for label in all_labels() {
            if label == "heis4/S2" {
                assert!(matches!(init_circuit(&label), Err(Error::NoCircuit(_))));
                continue;
            }
            let target = target_statevector(&label).unwrap();
            let got = prepared(&label);
            let d = phase_aligned_vec_distance(&got, target.amplitudes().unwrap());
            assert!(d < 1e-8, "{label}: distance {d}");
        }
    }

    #[test]
    fn singlet_pair_energy() {
        let s = target_statevector("heis4/S1").unwrap();
        let e = s.expectation(&heisenberg_chain(4, 1.0).unwrap()).unwrap();
        assert!((e + 6.0).abs() < 1e-12);
    }

    #[test]
    fn triplet_cnot_counts() {
        assert_eq!(init_circuit("heis4/T1/+1").unwrap().count(GateKind::Cnot), 5);
        assert_eq!(init_circuit("heis4/T3/-1").unwrap().count(GateKind::Cnot), 5);
        assert_eq!(init_circuit("heis4/T2/0").unwrap().count(GateKind::Cnot), 3);
        assert_eq!(init_circuit("heis8/T1/0").unwrap().count(GateKind::Cnot), 4);
        assert_eq!(init_circuit("ising8/E2").unwrap().count(GateKind::Cnot), 1);
    }

    #[test]
    fn cascade_round_trips() {
        let cases: [[f64; 4]; 3] = [
            [-0.5, 0.5, -0.5, 0.5],
            [0.0, 0.0, 0.0, 1.0],
            [-0.5, -0.5, 0.5, 0.5],
        ];
        for t in cases {
            let target: Vec<C64> = t.iter().map(|&x| amp(x)).collect();
            let c = cascade_circuit(solve_cascade_angles(&target).unwrap()).unwrap();
            let mut s = QuantumState::zero(4);
            s.apply_circuit(&c, &[]).unwrap();
            let v = s.amplitudes().unwrap();
            for q in 0..4 {
                assert!((v[1 << (3 - q)] - target[q]).norm() < 1e-8);
            }
        }
        let bad = [amp(1.0), amp(1.0), amp(0.0), amp(0.0)];
        assert!(matches!(solve_cascade_angles(&bad), Err(Error::Unreachable(_))));
    }

    #[test]
    fn quantum_numbers_of_targets() {
        let expect = [
            ("heis4/S1", 0, 0, 1),
            ("heis4/S2", 0, 0, 1),
            ("heis4/T1/+1", 1, 1, -1),
            ("heis4/T2/0", 1, 0, 1),
            ("heis4/T3/-1", 1, -1, -1),
            ("heis4/Q/-2", 2, -2, 1),
            ("heis8/S1", 0, 0, 1),
        ];
        for (label, s, sz, m) in expect {
            let q = quantum_numbers(&target_statevector(label).unwrap(), Model::Heisenberg).unwrap();
            assert_eq!(q.s, Some(HalfInt::from_int(s)), "{label}");
            assert_eq!(q.s_z, Some(HalfInt::from_int(sz)), "{label}");
            assert_eq!(q.m, Some(m), "{label}");
        }
        let e2 = quantum_numbers(&target_statevector("ising8/E2").unwrap(), Model::Ising).unwrap();
        assert_eq!((e2.pi_z, e2.m), (Some(-1), Some(-1)));
        let e3 = quantum_numbers(&target_statevector("ising4/E3").unwrap(), Model::Ising).unwrap();
        assert_eq!((e3.pi_z, e3.m), (Some(-1), Some(1)));
    }

    #[test]
    fn unknown_label() {
        assert!(matches!(target_statevector("heis4/T9/0"), Err(Error::UnknownLabel(_))));
        assert!(matches!(init_circuit("potts4/E1"), Err(Error::UnknownLabel(_))));
    }
}
