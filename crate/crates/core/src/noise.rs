//! Gate depolarizing and readout noise on the density-matrix backend.

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::sim::{MeasurementHistogram, QuantumState};
use crate::{Error, Result};

/// Row-stochastic confusion matrix: `m[true][measured]`.
pub type Confusion = [[f64; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after each single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    /// Per-qubit readout confusion; empty means perfect readout.
    #[serde(default)]
    pub readout: Vec<Confusion>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p1: 0.001,
            p2: 0.01,
            readout: Vec::new(),
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            readout: Vec::new(),
        }
    }

    pub fn depolarizing(p1: f64, p2: f64) -> Self {
        Self {
            p1,
            p2,
            readout: Vec::new(),
        }
    }

    pub fn with_readout(mut self, readout: Vec<Confusion>) -> Self {
        self.readout = readout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        for (q, m) in self.readout.iter().enumerate() {
            for row in m {
                if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (row[0] + row[1] - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidNoise(format!(
                        "confusion matrix of qubit {q} is not row-stochastic"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.readout.is_empty()
    }

    pub fn has_readout(&self) -> bool {
        !self.readout.is_empty()
    }

    fn confusion(&self, q: usize) -> Option<&Confusion> {
        self.readout.get(q)
    }

    /// Measured-outcome distribution given the true one.
    pub fn apply_readout(&self, probs: &[f64]) -> Vec<f64> {
        let n = probs.len().trailing_zeros() as usize;
        let mut p = probs.to_vec();
        for q in 0..n {
            if let Some(m) = self.confusion(q) {
                let t = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
                apply_real_1q(&mut p, n - 1 - q, &t);
            }
        }
        p
    }
}

fn apply_real_1q(p: &mut [f64], bit: usize, m: &[[f64; 2]; 2]) {
    let stride = 1usize << bit;
    let mut base = 0;
    while base < p.len() {
        for i in base..base + stride {
            let (a0, a1) = (p[i], p[i + stride]);
            p[i] = m[0][0] * a0 + m[0][1] * a1;
            p[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * stride;
    }
}

/// Run `circ` (lowered first) on `initial`, depolarizing after every gate.
pub fn run_noisy(initial: &QuantumState, circ: &Circuit, theta: &[f64], model: &NoiseModel) -> Result<QuantumState> {
    model.validate()?;
    let lowered = circ.lowered();
    let angles = lowered.bind(theta)?;
    let mut state = initial.to_mixed();
    for (op, angle) in lowered.ops().iter().zip(angles) {
        let mut single = Circuit::new(lowered.n_qubits(), 0);
        let mut bound = op.clone();
        bound.angle = angle.map(crate::circuit::Angle::Fixed);
        single.push(bound)?;
        state.apply_circuit(&single, &[])?;
        match op.targets.as_slice() {
            [q] => state.depolarize_1q(*q, model.p1),
            [a, b] => state.depolarize_2q(*a, *b, model.p2),
            _ => unreachable!(),
        }
    }
    Ok(state)
}

/// Invert the tensor-product confusion matrix on the empirical distribution.
///
/// Negative quasi-probabilities are clipped to zero and the result renormalized.
pub fn readout_correct(hist: &MeasurementHistogram, model: &NoiseModel) -> Result<Vec<f64>> {
    let total = hist.retained();
    let counts = hist.count_vector();
    let probs: Vec<f64> = counts
        .iter()
        .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
        .collect();
    correct_probabilities(&probs, model)
}

pub fn correct_probabilities(probs: &[f64], model: &NoiseModel) -> Result<Vec<f64>> {
    let n = probs.len().trailing_zeros() as usize;
    let mut p = probs.to_vec();
    for q in 0..n {
        let Some(m) = model.confusion(q) else { continue };
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::SingularConfusion(q));
        }
        // Inverse of the transposed (column-acting) matrix.
        let inv = [[m[1][1] / det, -m[1][0] / det], [-m[0][1] / det, m[0][0] / det]];
        apply_real_1q(&mut p, n - 1 - q, &inv);
    }
    for x in p.iter_mut() {
        *x = x.max(0.0);
    }
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter_mut().for_each(|x| *x /= s);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::sim::sample_probabilities;

    const C: Confusion = [[0.93, 0.07], [0.11, 0.89]];

    #[test]
    fn identity_confusion_is_neutral() {
        let m = NoiseModel::noiseless().with_readout(vec![[[1.0, 0.0], [0.0, 1.0]]; 2]);
        let p = vec![0.1, 0.2, 0.3, 0.4];
        assert_eq!(m.apply_readout(&p), p);
        assert_eq!(correct_probabilities(&p, &m).unwrap(), p);
    }

    #[test]
    fn single_qubit_round_trip() {
        let m = NoiseModel::noiseless().with_readout(vec![C]);
        let truth = vec![0.3, 0.7];
        let measured = m.apply_readout(&truth);
        assert!((measured[0] - (0.3 * 0.93 + 0.7 * 0.11)).abs() < 1e-15);
        let back = correct_probabilities(&measured, &m).unwrap();
        for (a, b) in back.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sampled_round_trip_within_shot_noise() {
        let m = NoiseModel::noiseless().with_readout(vec![C, C]);
        let truth = vec![0.4, 0.1, 0.2, 0.3];
        let hist = sample_probabilities(&m.apply_readout(&truth), 2, 6000, 11);
        let back = readout_correct(&hist, &m).unwrap();
        for (a, b) in back.iter().zip(&truth) {
            // Inversion amplifies shot noise by roughly 1/det per qubit.
            let sigma = (b * (1.0 - b) / 6000.0).sqrt() / (0.82f64 * 0.82);
            assert!((a - b).abs() < 5.0 * sigma, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_and_invalid_models() {
        let m = NoiseModel::noiseless().with_readout(vec![[[0.5, 0.5], [0.5, 0.5]]]);
        assert_eq!(correct_probabilities(&[0.5, 0.5], &m), Err(Error::SingularConfusion(0)));
        assert!(NoiseModel::depolarizing(1.5, 0.0).validate().is_err());
        let bad = NoiseModel::noiseless().with_readout(vec![[[0.9, 0.2], [0.0, 1.0]]]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn noisy_run_keeps_trace() {
        let mut c = Circuit::new(2, 1);
        c.gate(GateKind::H, &[0]).unwrap();
        c.rotation(GateKind::Nh, &[0, 1], crate::Angle::param(0)).unwrap();
        let s = run_noisy(&QuantumState::zero(2), &c, &[0.4], &NoiseModel::default()).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-12);
        assert!(s.purity() < 1.0);
        let clean = run_noisy(&QuantumState::zero(2), &c, &[0.4], &NoiseModel::noiseless()).unwrap();
        assert!((clean.purity() - 1.0).abs() < 1e-12);
    }
}
