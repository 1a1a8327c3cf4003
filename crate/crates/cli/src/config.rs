//! TOML experiment configuration and its resolution against the built-in catalog.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use spinspec_core::catalog::{self, Experiment};
use spinspec_core::compile::{EnvelopeSpec, Timing};
use spinspec_core::cost::CostKind;
use spinspec_core::optim::{NelderMeadConfig, Optimizer};
use spinspec_core::{AnsatzSpec, Backend, Model, NoiseModel, Penalty, Symmetry, Tie};

/// One run description.
///
/// Either `experiment` names a built-in key, or `model`, `n_qubits`, `labels`,
/// `ansatz` and `cost` describe a custom run. Explicit fields override the
/// built-in ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub model: Option<Model>,
    #[serde(default)]
    pub n_qubits: Option<usize>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub ansatz: Option<AnsatzConfig>,
    #[serde(default)]
    pub cost: Option<CostConfig>,
    #[serde(default)]
    pub optimizer: Option<Optimizer>,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub zne: ZneConfig,
    #[serde(default)]
    pub compile: CompileConfig,
    /// Expected energy per output state; enables convergence flagging.
    #[serde(default)]
    pub targets: Option<Vec<f64>>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub seed: u64,
    /// Number of consecutive seeds starting at `seed`.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
}

fn default_tolerance() -> f64 {
    5e-2
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

fn default_seeds() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub symmetry: Symmetry,
    pub layers: usize,
    #[serde(default = "yes")]
    pub mirror: bool,
    #[serde(default)]
    pub block_tie: Tie,
    #[serde(default)]
    pub rotation_tie: Tie,
}

fn yes() -> bool {
    true
}

/// Cost by name (`energy`, `C1`, `C2`, `C3`) with optional overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub name: String,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Target `S_tot²` eigenvalue for the penalty.
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    #[default]
    Exact,
    Shots {
        #[serde(default = "default_shots")]
        shots: u64,
    },
    Noisy {
        #[serde(default = "default_p1")]
        p1: f64,
        #[serde(default = "default_p2")]
        p2: f64,
        #[serde(default)]
        shots: Option<u64>,
    },
}

fn default_shots() -> u64 {
    6000
}

fn default_p1() -> f64 {
    0.001
}

fn default_p2() -> f64 {
    0.01
}

impl BackendConfig {
    pub fn backend(&self, seed: u64) -> Backend {
        match *self {
            BackendConfig::Exact => Backend::Exact,
            BackendConfig::Shots { shots } => Backend::Shots { shots, seed },
            BackendConfig::Noisy { p1, p2, shots } => Backend::Noisy {
                model: NoiseModel::depolarizing(p1, p2),
                shots,
                seed,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZneConfig {
    #[serde(default = "default_grid")]
    pub grid: Vec<usize>,
    #[serde(default = "default_p1")]
    pub p1: f64,
    #[serde(default = "default_p2")]
    pub p2: f64,
    #[serde(default)]
    pub shots: Option<u64>,
    /// Output state to mitigate; defaults to the experiment's reported state.
    #[serde(default)]
    pub state: Option<usize>,
}

fn default_grid() -> Vec<usize> {
    (1..=6).collect()
}

impl Default for ZneConfig {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            p1: default_p1(),
            p2: default_p2(),
            shots: None,
            state: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileConfig {
    #[serde(default)]
    pub state: Option<usize>,
    /// Circuit parameters; trained from `seed` when absent.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub timing: Timing,
    #[serde(default)]
    pub envelope: EnvelopeSpec,
}

impl ExperimentConfig {
    /// Minimal config for a built-in experiment.
    pub fn for_key(key: &str, seed: u64) -> Self {
        Self {
            experiment: Some(key.to_string()),
            model: None,
            n_qubits: None,
            labels: None,
            ansatz: None,
            cost: None,
            optimizer: None,
            backend: BackendConfig::default(),
            zne: ZneConfig::default(),
            compile: CompileConfig::default(),
            targets: None,
            tolerance: default_tolerance(),
            out: default_out(),
            seed,
            seeds: default_seeds(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// SHA-256 of the canonical JSON form of the effective config, without `out`.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("out");
        }
        hex::encode(Sha256::digest(serde_json::to_vec(&v).expect("config serializes")))
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds.max(1) as u64).map(|i| self.seed + i).collect()
    }

    /// Model and register size without building the full experiment.
    pub fn system(&self) -> Result<(Model, usize)> {
        let base = self.base()?;
        let model = self.model.or(base.as_ref().map(|b| b.model));
        let n = self.n_qubits.or(base.as_ref().map(|b| b.n_qubits));
        match (model, n) {
            (Some(m), Some(n)) => Ok((m, n)),
            _ => bail!("config needs `experiment` or both `model` and `n_qubits`"),
        }
    }

    fn base(&self) -> Result<Option<Experiment>> {
        self.experiment
            .as_deref()
            .map(|k| catalog::experiment(k).with_context(|| format!("unknown experiment `{k}`")))
            .transpose()
    }

    /// Fill every field from the catalog entry and the overrides.
    pub fn resolve(&self) -> Result<Experiment> {
        let base = self.base()?;
        let (model, n) = self.system()?;
        let labels_changed = self.labels.is_some();
        let inits = match (&self.labels, &base) {
            (Some(l), _) => l.clone(),
            (None, Some(b)) => b.inits.clone(),
            (None, None) => bail!("config needs `labels`"),
        };
        if inits.is_empty() {
            bail!("`labels` is empty");
        }
        let ansatz = match (&self.ansatz, &base) {
            (Some(a), _) => AnsatzSpec {
                model,
                symmetry: a.symmetry,
                n_qubits: n,
                layers: a.layers,
                mirror: a.mirror,
                block_tie: a.block_tie,
                rotation_tie: a.rotation_tie,
            },
            (None, Some(b)) if b.model == model && b.n_qubits == n => b.ansatz.clone(),
            _ => bail!("config needs an `[ansatz]` section"),
        };
        let base_cost = base.as_ref().filter(|_| !labels_changed).map(|b| (b.cost, b.weights.clone(), b.penalty));
        let (cost, weights, penalty) = match (&self.cost, base_cost) {
            (Some(c), _) => {
                let kind = CostKind::parse(&c.name)?;
                let (w, p) = kind.defaults(inits.len());
                let penalty = match (p, c.beta, c.target) {
                    (p, None, None) => p,
                    (Penalty::STot2Target { beta, target }, b, t) => Penalty::STot2Target {
                        beta: b.unwrap_or(beta),
                        target: t.unwrap_or(target),
                    },
                    (Penalty::STot2 { beta }, b, None) => Penalty::STot2 { beta: b.unwrap_or(beta) },
                    (Penalty::STot2 { beta }, b, Some(target)) => Penalty::STot2Target {
                        beta: b.unwrap_or(beta),
                        target,
                    },
                    (Penalty::None, Some(beta), None) => Penalty::STot2 { beta },
                    (Penalty::None, b, Some(target)) => Penalty::STot2Target {
                        beta: b.unwrap_or(5.0),
                        target,
                    },
                };
                (kind, c.weights.clone().unwrap_or(w), penalty)
            }
            (None, Some(b)) => b,
            (None, None) => {
                let (w, p) = CostKind::Energy.defaults(inits.len());
                (CostKind::Energy, w, p)
            }
        };
        if weights.len() != inits.len() {
            bail!("{} weights for {} initial states", weights.len(), inits.len());
        }
        let optimizer = self
            .optimizer
            .or(base.as_ref().map(|b| b.optimizer))
            .unwrap_or(Optimizer::NelderMead(NelderMeadConfig::default()));
        let targets = match (&self.targets, &base) {
            (Some(t), _) => t.clone(),
            (None, Some(b)) if !labels_changed => b.targets.clone(),
            _ => Vec::new(),
        };
        if !targets.is_empty() && targets.len() != inits.len() {
            bail!("{} targets for {} initial states", targets.len(), inits.len());
        }
        let report = base.as_ref().filter(|_| !labels_changed).map_or(0, |b| b.report);
        Ok(Experiment {
            key: self.experiment.clone().unwrap_or_else(|| "custom".into()),
            model,
            n_qubits: n,
            ansatz,
            inits,
            cost,
            weights,
            penalty,
            optimizer,
            report,
            targets,
            table: base.and_then(|b| b.table),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_key_resolves_unchanged() {
        let cfg = ExperimentConfig::from_toml("experiment = \"heis4/S2\"\nseed = 3\n").unwrap();
        let e = cfg.resolve().unwrap();
        assert_eq!(e, catalog::experiment("heis4/S2").unwrap());
        assert_eq!(cfg.seed_list(), vec![3]);
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(ExperimentConfig::from_toml("experiment = \"heis4/S1\"\n").is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_toml("experiment = \"heis4/S1\"\nseed = 1\nfoo = 2\n").is_err());
        let cfg = ExperimentConfig::from_toml("experiment = \"heis4/S9\"\nseed = 1\n").unwrap();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn custom_run_with_overrides() {
        let text = r#"
model = "heisenberg"
n_qubits = 4
labels = ["heis4/Q/0"]
seed = 0

[ansatz]
symmetry = "z_magnetization"
layers = 2
rotation_tie = "antisymmetric"

[cost]
name = "C2"
beta = 7.5
"#;
        let e = ExperimentConfig::from_toml(text).unwrap().resolve().unwrap();
        assert_eq!(e.key, "custom");
        assert_eq!(e.penalty, Penalty::STot2Target { beta: 7.5, target: 6.0 });
        assert_eq!(e.weights, vec![1.0]);
        assert!(e.targets.is_empty());
    }

    #[test]
    fn custom_without_ansatz_fails() {
        let text = "model = \"ising\"\nn_qubits = 4\nlabels = [\"ising4/E1\"]\nseed = 0\n";
        assert!(ExperimentConfig::from_toml(text).unwrap().resolve().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::for_key("heis4/S1", 1);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn partial_envelope_table() {
        let text = "experiment = \"heis4/S1\"\nseed = 0\n[compile.envelope]\neps = 3.0\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.compile.envelope.eps, 3.0);
        assert_eq!(cfg.compile.envelope.tau, EnvelopeSpec::default().tau);
    }
}
