//! Small dense linear-algebra helpers over complex matrices.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub type CMatrix = DMatrix<C64>;

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖AB − BA‖_max`.
pub fn commutator_max(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

/// Max-norm distance between `a` and `b` after removing the relative global phase.
///
/// The phase is taken from `tr(b† a)`, which is well defined whenever the two
/// matrices are close to proportional.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

/// Same as [`phase_aligned_distance`] for state vectors.
pub fn phase_aligned_vec_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Real symmetric input (every imaginary part below 1e-14) takes the real
/// solver, which is several times faster for the model Hamiltonians.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let dim = m.nrows();
    let is_real = m.iter().all(|z| z.im.abs() < 1e-14);
    let (values, vectors): (Vec<f64>, CMatrix) = if is_real {
        let re = m.map(|z| z.re);
        let eig = re.symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let mut sorted_vectors = CMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    (sorted_values, sorted_vectors)
}

/// Matrix-vector product on plain slices.
pub fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    let dv = DVector::from_column_slice(v);
    (m * dv).iter().copied().collect()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Multiply `v` by the unit phase that makes its first non-negligible entry real positive.
pub fn canonical_phase(v: &mut [C64]) {
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}
