use std::f64::consts::FRAC_PI_2;

use super::{Angle, GateKind, GateOp};

/// Three-CNOT realization of `exp(iθ(XX + YY + ZZ))` on `(a, b)`, up to global phase.
pub fn decompose_nh(a: usize, b: usize, theta: Angle) -> Vec<GateOp> {
    vec![
        GateOp::with_angle(GateKind::Rz, &[b], Angle::Fixed(FRAC_PI_2)),
        GateOp::new(GateKind::Cnot, &[b, a]),
        GateOp::with_angle(GateKind::Rz, &[a], theta.affine(-2.0, FRAC_PI_2)),
        GateOp::with_angle(GateKind::Ry, &[b], theta.affine(-2.0, FRAC_PI_2)),
        GateOp::new(GateKind::Cnot, &[a, b]),
        GateOp::with_angle(GateKind::Ry, &[b], theta.affine(2.0, -FRAC_PI_2)),
        GateOp::new(GateKind::Cnot, &[b, a]),
        GateOp::with_angle(GateKind::Rz, &[a], Angle::Fixed(-FRAC_PI_2)),
    ]
}

/// Two-CNOT realization of `exp(−iθ XX / 2)` on `(a, b)`.
pub fn decompose_ni(a: usize, b: usize, theta: Angle) -> Vec<GateOp> {
    vec![
        GateOp::new(GateKind::Cnot, &[a, b]),
        GateOp::with_angle(GateKind::Rx, &[a], theta),
        GateOp::new(GateKind::Cnot, &[a, b]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, Circuit};
    use crate::linalg::{eigh, phase_aligned_distance, CMatrix};
    use crate::pauli::{PauliString, PauliSum};
    use crate::C64;

    fn expm_i(generator: &PauliSum, t: f64) -> CMatrix {
        let (vals, vecs) = eigh(&generator.to_matrix());
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|v| C64::from_polar(1.0, t * v)),
        ));
        &vecs * d * vecs.adjoint()
    }

    fn heis_generator() -> PauliSum {
        PauliSum::from_real_terms(
            2,
            ["XX", "YY", "ZZ"].map(|s| (1.0, PauliString::parse(s).unwrap())),
        )
    }

    fn block(ops: Vec<GateOp>) -> Circuit {
        let mut c = Circuit::new(2, 1);
        for op in ops {
            c.push(op).unwrap();
        }
        c
    }

    #[test]
    fn nh_matches_matrix_exponential() {
        let g = heis_generator();
        for &t in &[0.0, std::f64::consts::FRAC_PI_4, 0.37, -2.1, 3.0] {
            let c = block(decompose_nh(0, 1, Angle::param(0)));
            assert_eq!(c.count(GateKind::Cnot), 3);
            let u = circuit_unitary(&c, &[t]).unwrap();
            assert!(phase_aligned_distance(&u, &expm_i(&g, t)) < 1e-9, "θ = {t}");
            let mut native = Circuit::new(2, 1);
            native.rotation(GateKind::Nh, &[0, 1], Angle::param(0)).unwrap();
            let v = circuit_unitary(&native, &[t]).unwrap();
            assert!(phase_aligned_distance(&v, &expm_i(&g, t)) < 1e-12);
        }
    }

    #[test]
    fn nh_on_reversed_wires_is_the_same_block() {
        let a = circuit_unitary(&block(decompose_nh(0, 1, Angle::Fixed(0.8))), &[0.0]).unwrap();
        let b = circuit_unitary(&block(decompose_nh(1, 0, Angle::Fixed(0.8))), &[0.0]).unwrap();
        assert!(phase_aligned_distance(&a, &b) < 1e-10);
    }

    #[test]
    fn ni_matches_closed_form() {
        let xx = PauliSum::from_real_terms(2, [(1.0, PauliString::parse("XX").unwrap())]);
        for &t in &[0.0, std::f64::consts::PI, 0.9, -1.7] {
            let c = block(decompose_ni(0, 1, Angle::param(0)));
            assert_eq!(c.count(GateKind::Cnot), 2);
            let u = circuit_unitary(&c, &[t]).unwrap();
            assert!(phase_aligned_distance(&u, &expm_i(&xx, -t / 2.0)) < 1e-9);
        }
        let pi = circuit_unitary(&block(decompose_ni(0, 1, Angle::Fixed(std::f64::consts::PI))), &[0.0])
            .unwrap();
        let minus_i_xx = xx.to_matrix() * C64::new(0.0, -1.0);
        assert!(phase_aligned_distance(&pi, &minus_i_xx) < 1e-12);
    }
}
