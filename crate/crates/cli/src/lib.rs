//! Config-driven experiment runs: exact spectra, VQE training, zero-noise
//! extrapolation and pulse compilation, persisted as JSON and CSV.

pub mod config;
pub mod runner;

pub use config::ExperimentConfig;
pub use runner::{run_compile, run_spectrum, run_vqe, run_zne, RunResult, VqeSummary};

use anyhow::{bail, Result};
use spinspec_core::compile::EnvelopeSpec;

/// Apply `key=value` overrides such as `eps=2,tau=60` to an envelope.
pub fn parse_envelope(spec: &str, mut env: EnvelopeSpec) -> Result<EnvelopeSpec> {
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((k, v)) = part.split_once('=') else {
            bail!("expected key=value, got `{part}`");
        };
        match k.trim() {
            "amplitude" => env.amplitude = v.trim().parse()?,
            "tau" => env.tau = v.trim().parse()?,
            "eps" => env.eps = v.trim().parse()?,
            "bipolar" => env.bipolar = v.trim().parse()?,
            other => bail!("unknown envelope field `{other}`"),
        }
    }
    Ok(env)
}
