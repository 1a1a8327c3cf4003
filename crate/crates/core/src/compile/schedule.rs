use serde::{Deserialize, Serialize};

use super::{mul2, u3_decompose, wrap, LayeredCircuit};
use crate::circuit::{matrix_1q, GateKind, Mat2};
use crate::linalg::CMatrix;
use crate::sim::QuantumState;
use crate::{Error, Result};

/// Slot lengths in nanoseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Timing {
    pub pulse_len: u64,
    pub gap: u64,
    pub cz_len: u64,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            pulse_len: 30,
            gap: 0,
            cz_len: 120,
        }
    }
}

/// Bipolar tanh CZ envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvelopeSpec {
    pub amplitude: f64,
    /// Width of one pole (ns).
    pub tau: f64,
    pub eps: f64,
    pub bipolar: bool,
}

impl Default for EnvelopeSpec {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            tau: 60.0,
            eps: 2.0,
            bipolar: true,
        }
    }
}

impl EnvelopeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !(self.eps > 0.0) {
            return Err(Error::InvalidNoise(format!(
                "envelope needs tau > 0 and eps > 0, got tau={} eps={}",
                self.tau, self.eps
            )));
        }
        Ok(())
    }

    /// Total support of the envelope.
    pub fn duration(&self) -> f64 {
        if self.bipolar {
            2.0 * self.tau
        } else {
            self.tau
        }
    }

    /// Amplitude at `t` ns after the start of the CZ slot.
    pub fn sample(&self, t: f64) -> f64 {
        if t < self.tau {
            tanh_envelope(self, t - 0.5 * self.tau)
        } else if self.bipolar {
            -tanh_envelope(self, t - 1.5 * self.tau)
        } else {
            0.0
        }
    }
}

/// One pole, `t` measured from its center; zero outside `|t| < τ/2`.
pub fn tanh_envelope(spec: &EnvelopeSpec, t: f64) -> f64 {
    if t.abs() >= 0.5 * spec.tau {
        return 0.0;
    }
    spec.amplitude * (4.0 * spec.eps * (0.5 - t.abs() / spec.tau)).tanh() / (2.0 * spec.eps).tanh()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseEvent {
    /// Physical π/2 rotation about `cos φ X + sin φ Y`.
    X90 {
        start: u64,
        duration: u64,
        qubit: usize,
        phase: f64,
    },
    /// Frame update, not emitted physically.
    VirtualZ { start: u64, qubit: usize, angle: f64 },
    Cz {
        start: u64,
        duration: u64,
        qubits: [usize; 2],
    },
}

impl PulseEvent {
    pub fn start(&self) -> u64 {
        match self {
            PulseEvent::X90 { start, .. } | PulseEvent::VirtualZ { start, .. } | PulseEvent::Cz { start, .. } => *start,
        }
    }

    pub fn qubit(&self) -> usize {
        match self {
            PulseEvent::X90 { qubit, .. } | PulseEvent::VirtualZ { qubit, .. } => *qubit,
            PulseEvent::Cz { qubits, .. } => qubits[0],
        }
    }

    /// Event with its phase or angle zeroed, for structural comparison.
    pub fn skeleton(&self) -> PulseEvent {
        let mut e = self.clone();
        match &mut e {
            PulseEvent::X90 { phase, .. } => *phase = 0.0,
            PulseEvent::VirtualZ { angle, .. } => *angle = 0.0,
            PulseEvent::Cz { .. } => {}
        }
        e
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub n_qubits: usize,
    pub timing: Timing,
    pub envelope: EnvelopeSpec,
    pub duration: u64,
    pub one_qubit_cycles: usize,
    pub two_qubit_cycles: usize,
    /// Sorted by start time, then qubit.
    pub events: Vec<PulseEvent>,
    /// Residual Z frame per qubit at the end; not emitted.
    pub final_frame: Vec<f64>,
}

impl PulseSchedule {
    pub fn pulses_on(&self, q: usize) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, PulseEvent::X90 { qubit, .. } if *qubit == q))
            .count()
    }

    pub fn skeleton(&self) -> Vec<PulseEvent> {
        self.events.iter().map(PulseEvent::skeleton).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes") + "\n"
    }
}

/// Turn each SU(2) into two phased π/2 pulses, carrying Z frames forward.
pub fn emit_schedule(lc: &LayeredCircuit, timing: &Timing, envelope: &EnvelopeSpec) -> Result<PulseSchedule> {
    lc.validate()?;
    envelope.validate()?;
    let n = lc.n_qubits;
    let mut frame = vec![0.0; n];
    let mut events = Vec::new();
    let mut t = 0u64;
    let step = timing.pulse_len + timing.gap;
    for (c, cycle) in lc.one_qubit.iter().enumerate() {
        for (q, u) in cycle.iter().enumerate() {
            let (lambda, theta, phi) = u3_decompose(u);
            let f1 = frame[q] + lambda;
            let f2 = f1 + theta;
            events.push(PulseEvent::VirtualZ { start: t, qubit: q, angle: lambda });
            events.push(PulseEvent::X90 {
                start: t,
                duration: timing.pulse_len,
                qubit: q,
                phase: wrap(-f1),
            });
            events.push(PulseEvent::VirtualZ { start: t + step, qubit: q, angle: theta });
            events.push(PulseEvent::X90 {
                start: t + step,
                duration: timing.pulse_len,
                qubit: q,
                phase: wrap(-f2),
            });
            events.push(PulseEvent::VirtualZ {
                start: t + 2 * step,
                qubit: q,
                angle: phi,
            });
            frame[q] = wrap(f2 + phi);
        }
        t += 2 * step;
        if let Some(pairs) = lc.cz.get(c) {
            for &(a, b) in pairs {
                events.push(PulseEvent::Cz {
                    start: t,
                    duration: timing.cz_len,
                    qubits: [a, b],
                });
            }
            t += timing.cz_len + timing.gap;
        }
    }
    events.sort_by_key(|e| (e.start(), e.qubit()));
    Ok(PulseSchedule {
        n_qubits: n,
        timing: *timing,
        envelope: *envelope,
        duration: t,
        one_qubit_cycles: lc.one_qubit.len(),
        two_qubit_cycles: lc.cz.len(),
        events,
        final_frame: frame,
    })
}

fn phased_x90(phase: f64) -> Mat2 {
    mul2(
        &matrix_1q(GateKind::Rz, phase),
        &mul2(&matrix_1q(GateKind::XHalf, 0.0), &matrix_1q(GateKind::Rz, -phase)),
    )
}

/// Unitary implemented by the physical pulses followed by the final frame.
pub fn schedule_unitary(s: &PulseSchedule) -> Result<CMatrix> {
    if s.n_qubits > crate::circuit::UNITARY_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n_qubits: s.n_qubits,
            limit: crate::circuit::UNITARY_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << s.n_qubits;
    let cz = crate::circuit::matrix_2q(GateKind::Cz, 0.0);
    let mut u = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut st = QuantumState::basis(s.n_qubits, col);
        for e in &s.events {
            match *e {
                PulseEvent::X90 { qubit, phase, .. } => st.apply_1q(qubit, &phased_x90(phase)),
                PulseEvent::Cz { qubits, .. } => st.apply_2q(qubits[0], qubits[1], &cz),
                PulseEvent::VirtualZ { .. } => {}
            }
        }
        for (q, &f) in s.final_frame.iter().enumerate() {
            st.apply_1q(q, &matrix_1q(GateKind::Rz, f));
        }
        for (row, a) in st.amplitudes().expect("pure").iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}
