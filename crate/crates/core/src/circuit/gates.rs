use std::f64::consts::FRAC_PI_2;

use super::GateKind;
use crate::C64;

pub type Mat2 = [[C64; 2]; 2];
/// Two-qubit matrix in the basis `|t0 t1⟩`, index `2·t0 + t1`.
pub type Mat4 = [[C64; 4]; 4];

const O: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn rx(t: f64) -> Mat2 {
    let (s, c) = (t / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

fn ry(t: f64) -> Mat2 {
    let (s, c) = (t / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

fn rz(t: f64) -> Mat2 {
    [[C64::from_polar(1.0, -t / 2.0), O], [O, C64::from_polar(1.0, t / 2.0)]]
}

/// Matrix of a single-qubit gate; `angle` is ignored for fixed gates.
pub fn matrix_1q(kind: GateKind, angle: f64) -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::H => [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]],
        GateKind::X => [[O, ONE], [ONE, O]],
        GateKind::Y => [[O, -I], [I, O]],
        GateKind::Z => [[ONE, O], [O, -ONE]],
        GateKind::Identity => [[ONE, O], [O, ONE]],
        GateKind::XHalf => rx(FRAC_PI_2),
        GateKind::XHalfDag => rx(-FRAC_PI_2),
        GateKind::Rx => rx(angle),
        GateKind::Ry => ry(angle),
        GateKind::Rz => rz(angle),
        k => panic!("{} is not a single-qubit gate", k.name()),
    }
}

pub fn matrix_2q(kind: GateKind, angle: f64) -> Mat4 {
    let mut m = [[O; 4]; 4];
    match kind {
        GateKind::Cnot => {
            m[0][0] = ONE;
            m[1][1] = ONE;
            m[2][3] = ONE;
            m[3][2] = ONE;
        }
        GateKind::Cz => {
            m[0][0] = ONE;
            m[1][1] = ONE;
            m[2][2] = ONE;
            m[3][3] = -ONE;
        }
        GateKind::Nh => {
            // exp(iθ(2·SWAP − I)) = e^{−iθ}(cos 2θ + i sin 2θ SWAP)
            let g = C64::from_polar(1.0, -angle);
            let (s, c) = (2.0 * angle).sin_cos();
            let diag = g * c;
            let swap = g * I * s;
            m[0][0] = diag + swap;
            m[3][3] = diag + swap;
            m[1][1] = diag;
            m[2][2] = diag;
            m[1][2] = swap;
            m[2][1] = swap;
        }
        GateKind::Ni => {
            let (s, c) = (angle / 2.0).sin_cos();
            let c = C64::new(c, 0.0);
            let s = C64::new(0.0, -s);
            for (k, row) in m.iter_mut().enumerate() {
                row[k] = c;
                row[3 - k] = s;
            }
        }
        k => panic!("{} is not a two-qubit gate", k.name()),
    }
    m
}
