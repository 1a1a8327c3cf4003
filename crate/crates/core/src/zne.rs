//! Zero-noise extrapolation: circuit folding, per-k estimates and the fit.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, GateOp};
use crate::cost::{measure, MeasureOptions};
use crate::noise::{run_noisy, NoiseModel};
use crate::pauli::PauliSum;
use crate::sim::QuantumState;
use crate::{Error, Result};

/// Replace every `N(θ)` block with `k` consecutive `N(θ/k)` blocks.
///
/// Single-qubit gates are kept as they are.
pub fn fold_ansatz(circ: &Circuit, k: usize) -> Result<Circuit> {
    if k == 0 {
        return Err(Error::ZeroFoldFactor);
    }
    let mut out = Circuit::new(circ.n_qubits(), circ.n_params());
    for op in circ.ops() {
        match op.kind {
            GateKind::Nh | GateKind::Ni => {
                let angle = op.angle.expect("block gates carry an angle");
                let part = angle.affine(1.0 / k as f64, 0.0);
                for _ in 0..k {
                    out.push(GateOp::with_angle(op.kind, &op.targets, part))?;
                }
            }
            kind if kind.arity() == 2 => return Err(Error::NotFoldable(kind.name())),
            _ => out.push(op.clone())?,
        }
    }
    Ok(out)
}

/// `(U U†)ⁿ U` with `n = (k−1)/2`.
pub fn fold_init(u: &Circuit, k: usize) -> Result<Circuit> {
    if k == 0 {
        return Err(Error::ZeroFoldFactor);
    }
    if k.is_multiple_of(2) {
        return Err(Error::EvenFoldFactor(k));
    }
    let inv = u.invert();
    let mut out = Circuit::new(u.n_qubits(), u.n_params());
    for _ in 0..(k - 1) / 2 {
        out.append(u)?;
        out.append(&inv)?;
    }
    out.append(u)?;
    Ok(out)
}

/// Trained circuit pieces needed to evaluate one state under folding.
#[derive(Clone, Debug)]
pub struct ZneExperiment {
    pub init: Circuit,
    pub ansatz: Circuit,
    pub theta: Vec<f64>,
    pub observable: PauliSum,
    pub noise: NoiseModel,
    pub shots: Option<u64>,
    pub seed: u64,
}

impl ZneExperiment {
    fn run_once(&self, init_k: usize, ansatz: &Circuit, seed: u64) -> Result<(f64, f64)> {
        let mut full = fold_init(&self.init, init_k)?.with_n_params(ansatz.n_params())?;
        full.append(ansatz)?;
        let rho = run_noisy(&QuantumState::zero(full.n_qubits()), &full, &self.theta, &self.noise)?;
        if self.shots.is_none() && !self.noise.has_readout() {
            return Ok((rho.expectation(&self.observable)?, 0.0));
        }
        let opts = MeasureOptions {
            shots: self.shots,
            seed,
            postselect: None,
            readout: self.noise.has_readout().then_some(&self.noise),
            correct_readout: false,
        };
        let e = measure(&rho, &self.observable, &opts)?;
        Ok((e.value, e.stderr))
    }

    /// Circuit run at scale `k` (odd `k`; even `k` uses `k−1` for the initializer).
    pub fn folded_circuit(&self, k: usize) -> Result<Circuit> {
        let ansatz = fold_ansatz(&self.ansatz, k)?;
        let ik = if k.is_multiple_of(2) { k - 1 } else { k };
        let mut full = fold_init(&self.init, ik)?.with_n_params(ansatz.n_params())?;
        full.append(&ansatz)?;
        Ok(full)
    }
}

/// Energy and standard error at noise scale `k`.
pub fn estimate_at_k(exp: &ZneExperiment, k: usize) -> Result<(f64, f64)> {
    let ansatz = fold_ansatz(&exp.ansatz, k)?;
    let seed = exp.seed.wrapping_mul(1000).wrapping_add(k as u64);
    if k % 2 == 1 {
        return exp.run_once(k, &ansatz, seed);
    }
    let (e1, s1) = exp.run_once(k - 1, &ansatz, seed)?;
    let (e2, s2) = exp.run_once(k + 1, &ansatz, seed ^ 0xA5A5)?;
    Ok((0.5 * (e1 + e2), 0.5 * (s1 * s1 + s2 * s2).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZnePoint {
    pub k: usize,
    pub energy: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ZneSeries {
    pub points: Vec<ZnePoint>,
}

impl ZneSeries {
    pub fn new(points: Vec<ZnePoint>) -> Result<Self> {
        let s = Self { points };
        s.validate()?;
        Ok(s)
    }

    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(k, energy)| ZnePoint { k, energy, stderr: 0.0 })
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.points {
            if p.k == 0 {
                return Err(Error::ZeroFoldFactor);
            }
            if !seen.insert(p.k) {
                return Err(Error::DuplicateScale(p.k));
            }
        }
        Ok(())
    }
}

/// Evaluate every `k` of `grid`.
pub fn collect_series(exp: &ZneExperiment, grid: &[usize]) -> Result<ZneSeries> {
    let points = grid
        .iter()
        .map(|&k| {
            estimate_at_k(exp, k).map(|(energy, stderr)| ZnePoint { k, energy, stderr })
        })
        .collect::<Result<Vec<_>>>()?;
    ZneSeries::new(points)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum FitParams {
    /// `E(k) = a + b·exp(−c·k)`.
    Exponential { a: f64, b: f64, c: f64 },
    /// `E(k) = a + b·k`.
    Linear { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub e0: f64,
    pub params: FitParams,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// True when the linear form was used.
    pub fallback: bool,
}

const C_MIN: f64 = 1e-3;
const C_MAX: f64 = 5.0;

/// Least-squares `(a, b)` for fixed basis values `g(k)`, plus the RMS residual.
fn linear_ls(ks: &[f64], es: &[f64], g: impl Fn(f64) -> f64) -> Option<(f64, f64, f64)> {
    let n = ks.len() as f64;
    let gs: Vec<f64> = ks.iter().map(|&k| g(k)).collect();
    let (sg, se) = (gs.iter().sum::<f64>(), es.iter().sum::<f64>());
    let sgg: f64 = gs.iter().map(|x| x * x).sum();
    let sge: f64 = gs.iter().zip(es).map(|(x, e)| x * e).sum();
    let det = n * sgg - sg * sg;
    if det.abs() < 1e-14 * n * sgg.max(1.0) {
        return None;
    }
    let b = (n * sge - sg * se) / det;
    let a = (se - b * sg) / n;
    let rss: f64 = gs.iter().zip(es).map(|(x, e)| (a + b * x - e).powi(2)).sum();
    Some((a, b, (rss / n).sqrt()))
}

/// Fit `a + b·exp(−c·k)`; fall back to a line when `c` runs to a boundary.
pub fn extrapolate(series: &ZneSeries) -> Result<Extrapolation> {
    series.validate()?;
    if series.points.len() < 3 {
        return Err(Error::TooFewPoints(series.points.len()));
    }
    let ks: Vec<f64> = series.points.iter().map(|p| p.k as f64).collect();
    let es: Vec<f64> = series.points.iter().map(|p| p.energy).collect();
    let linear = || {
        let (a, b, r) = linear_ls(&ks, &es, |k| k).expect("distinct k values");
        Extrapolation {
            e0: a,
            params: FitParams::Linear { a, b },
            residual: r,
            fallback: true,
        }
    };
    let scale = es.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
    let spread = es.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - es.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread <= 1e-12 * scale {
        let a = es.iter().sum::<f64>() / es.len() as f64;
        return Ok(Extrapolation {
            e0: a,
            params: FitParams::Exponential { a, b: 0.0, c: 1.0 },
            residual: 0.0,
            fallback: false,
        });
    }
    let resid = |log_c: f64| {
        let c = log_c.exp();
        linear_ls(&ks, &es, |k| (-c * k).exp()).map_or(f64::INFINITY, |r| r.2)
    };
    let (lo, hi) = (C_MIN.ln(), C_MAX.ln());
    let steps = 200;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let best = grid
        .iter()
        .enumerate()
        .min_by(|a, b| resid(*a.1).total_cmp(&resid(*b.1)))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    if best == 0 || best == steps {
        return Ok(linear());
    }
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (resid(x1), resid(x2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = resid(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = resid(x2);
        }
    }
    let c = (0.5 * (a + b)).exp();
    match linear_ls(&ks, &es, |k| (-c * k).exp()) {
        Some((a, b, r)) if a.is_finite() && b.is_finite() => Ok(Extrapolation {
            e0: a + b,
            params: FitParams::Exponential { a, b, c },
            residual: r,
            fallback: false,
        }),
        _ => Ok(linear()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, Angle};
    use crate::linalg::phase_aligned_distance;

    fn nh(theta: f64) -> Circuit {
        let mut c = Circuit::new(2, 0);
        c.rotation(GateKind::Nh, &[0, 1], Angle::Fixed(theta)).unwrap();
        c
    }

    #[test]
    fn fold_k3_splits_angle() {
        let f = fold_ansatz(&nh(0.6), 3).unwrap();
        assert_eq!(f.len(), 3);
        for op in f.ops() {
            assert!((op.angle.unwrap().eval(&[]).unwrap() - 0.2).abs() < 1e-15);
        }
        let d = phase_aligned_distance(&circuit_unitary(&f, &[]).unwrap(), &circuit_unitary(&nh(0.6), &[]).unwrap());
        assert!(d < 1e-9);
        assert_eq!(fold_ansatz(&nh(0.6), 1).unwrap(), nh(0.6));
    }

    #[test]
    fn fold_rejects_bare_cnot() {
        let mut c = Circuit::new(2, 0);
        c.gate(GateKind::Cnot, &[0, 1]).unwrap();
        assert_eq!(fold_ansatz(&c, 3), Err(Error::NotFoldable("CNOT")));
        assert_eq!(fold_ansatz(&c, 0), Err(Error::ZeroFoldFactor));
    }

    #[test]
    fn init_folding() {
        let mut u = Circuit::new(2, 0);
        u.gate(GateKind::H, &[0]).unwrap().gate(GateKind::Cnot, &[0, 1]).unwrap();
        assert_eq!(fold_init(&u, 1).unwrap(), u);
        let f3 = fold_init(&u, 3).unwrap();
        assert_eq!(f3.len(), 3 * u.len());
        let mut a = QuantumState::zero(2);
        a.apply_circuit(&u, &[]).unwrap();
        let mut b = QuantumState::zero(2);
        b.apply_circuit(&f3, &[]).unwrap();
        assert!((b.fidelity_with(a.amplitudes().unwrap()) - 1.0).abs() < 1e-12);
        assert_eq!(fold_init(&u, 4), Err(Error::EvenFoldFactor(4)));
    }

    #[test]
    fn flat_series() {
        let s = ZneSeries::from_pairs(&[(1, -6.4), (2, -6.4), (3, -6.4)]).unwrap();
        let r = extrapolate(&s).unwrap();
        assert!((r.e0 + 6.4).abs() < 1e-12);
        assert!(matches!(r.params, FitParams::Exponential { b, .. } if b.abs() < 1e-12));
    }

    #[test]
    fn synthetic_exponential_recovered() {
        let c = -(0.7f64).ln();
        let pairs: Vec<(usize, f64)> = (1..=6).map(|k| (k, -5.664 - 0.8 * (-c * k as f64).exp())).collect();
        let r = extrapolate(&ZneSeries::from_pairs(&pairs).unwrap()).unwrap();
        assert!(!r.fallback);
        assert!((r.e0 + 6.464).abs() < 1e-6, "{}", r.e0);
    }

    #[test]
    fn linear_series_falls_back() {
        let pairs: Vec<(usize, f64)> = (1..=5).map(|k| (k, -6.0 + 0.1 * k as f64)).collect();
        let r = extrapolate(&ZneSeries::from_pairs(&pairs).unwrap()).unwrap();
        assert!(r.fallback);
        assert!((r.e0 + 6.0).abs() < 1e-9);
    }

    #[test]
    fn series_errors() {
        assert_eq!(
            extrapolate(&ZneSeries::from_pairs(&[(1, 0.0), (2, 0.0)]).unwrap()),
            Err(Error::TooFewPoints(2))
        );
        assert_eq!(ZneSeries::from_pairs(&[(1, 0.0), (1, 0.1)]), Err(Error::DuplicateScale(1)));
    }
}
