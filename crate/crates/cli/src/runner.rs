//! Spectrum, VQE, ZNE and compile pipelines with their on-disk outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use spinspec_core::catalog::{Experiment, Training};
use spinspec_core::compile::{compile_circuit, PulseSchedule};
use spinspec_core::hamiltonians::{chain, labeled_spectrum, quantum_numbers, LabeledLevel};
use spinspec_core::zne::{collect_series, extrapolate, Extrapolation, ZnePoint};
use spinspec_core::{Backend, NoiseModel, QuantumNumbers};

use crate::config::ExperimentConfig;

pub const SPECTRUM_QUBIT_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config_hash: String,
    pub version: String,
    pub timestamp: String,
}

impl Metadata {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            config_hash: cfg.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZneOutcome {
    pub state: usize,
    pub noise: NoiseModel,
    pub shots: Option<u64>,
    pub points: Vec<ZnePoint>,
    pub extrapolation: Extrapolation,
}

/// Everything one run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub params: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evals: Option<usize>,
    /// Exact energy of each output state (or the lowest levels for a spectrum).
    pub energies: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub targets: Vec<f64>,
    /// `None` where an output is not a sharp eigenstate of a symmetry.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub quantum_numbers: Vec<Option<QuantumNumbers>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<Level>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zne: Option<ZneOutcome>,
    /// Set when a target is missed by more than the tolerance.
    pub flagged: bool,
    pub metadata: Metadata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub index: usize,
    pub energy: f64,
    #[serde(flatten)]
    pub numbers: QuantumNumbers,
}

impl From<LabeledLevel> for Level {
    fn from(l: LabeledLevel) -> Self {
        Self {
            index: l.index,
            energy: l.energy,
            numbers: l.numbers,
        }
    }
}

impl RunResult {
    fn empty(experiment: &str, cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed: None,
            params: Vec::new(),
            cost: None,
            iterations: None,
            evals: None,
            energies: Vec::new(),
            targets: Vec::new(),
            quantum_numbers: Vec::new(),
            spectrum: None,
            zne: None,
            flagged: false,
            metadata: Metadata::new(cfg),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn opt_cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run_label(cfg: &ExperimentConfig) -> String {
    cfg.experiment.clone().unwrap_or_else(|| "custom".into())
}

/// Exact spectrum with quantum-number labels; writes `spectrum.json` and `spectrum.csv`.
pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<RunResult> {
    let (model, n) = cfg.system()?;
    if n > SPECTRUM_QUBIT_LIMIT {
        bail!("spectrum is limited to {SPECTRUM_QUBIT_LIMIT} qubits, got {n}");
    }
    let h = chain(model, n, 1.0, 1.0)?;
    let levels: Vec<Level> = labeled_spectrum(model, &h)?.into_iter().map(Level::from).collect();
    let mut res = RunResult::empty(&run_label(cfg), cfg);
    res.energies = levels.iter().map(|l| l.energy).collect();
    let mut csv = String::from("index,energy,s,s_z,m,pi_z\n");
    for l in &levels {
        let q = &l.numbers;
        writeln!(
            csv,
            "{},{:.12},{},{},{},{}",
            l.index,
            l.energy,
            opt_cell(q.s.map(|x| x.value())),
            opt_cell(q.s_z.map(|x| x.value())),
            opt_cell(q.m),
            opt_cell(q.pi_z)
        )?;
    }
    res.spectrum = Some(levels);
    write(&cfg.out.join("spectrum.json"), &res.to_json())?;
    write(&cfg.out.join("spectrum.csv"), &csv)?;
    Ok(res)
}

fn is_flagged(energies: &[f64], targets: &[f64], tol: f64) -> bool {
    energies.iter().zip(targets).any(|(e, t)| (e - t).abs() > tol)
}

fn train_one(exp: &Experiment, cfg: &ExperimentConfig, seed: u64) -> Result<(RunResult, Training)> {
    let t = exp.train(seed, cfg.backend.backend(seed))?;
    let states = exp.cost_spec(Backend::Exact)?.output_states(&t.result.params)?;
    let mut res = RunResult::empty(&exp.key, cfg);
    res.seed = Some(seed);
    res.params = t.result.params.clone();
    res.cost = Some(t.result.cost);
    res.iterations = Some(t.result.trace.records.len());
    res.evals = Some(t.result.evals);
    res.energies = t.energies.clone();
    res.targets = exp.targets.clone();
    res.quantum_numbers = states.iter().map(|s| quantum_numbers(s, exp.model).ok()).collect();
    res.flagged = is_flagged(&res.energies, &res.targets, cfg.tolerance);
    Ok((res, t))
}

fn trace_csv(t: &Training) -> String {
    let mut csv = String::from("iteration,cost,phase,evals\n");
    for r in &t.result.trace.records {
        let phase = serde_json::to_value(r.phase).expect("phase serializes");
        let _ = writeln!(csv, "{},{:.12},{},{}", r.iteration, r.cost, phase.as_str().unwrap_or(""), r.evals);
    }
    csv
}

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

/// Summary over all seeds of one VQE run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeSummary {
    pub experiment: String,
    pub best_seed: u64,
    pub runs: Vec<RunResult>,
    pub flagged: bool,
    pub metadata: Metadata,
}

impl VqeSummary {
    pub fn best(&self) -> &RunResult {
        self.runs
            .iter()
            .find(|r| r.seed == Some(self.best_seed))
            .expect("best seed is among the runs")
    }
}

/// Train every seed concurrently; each seed writes to its own directory.
pub fn run_vqe(cfg: &ExperimentConfig) -> Result<VqeSummary> {
    let exp = cfg.resolve()?;
    exp.cost_spec(cfg.backend.backend(cfg.seed))?;
    let runs = cfg
        .seed_list()
        .into_par_iter()
        .map(|seed| {
            let (res, t) = train_one(&exp, cfg, seed)?;
            let dir = seed_dir(&cfg.out, seed);
            write(&dir.join("result.json"), &res.to_json())?;
            write(&dir.join("trace.jsonl"), &t.result.trace.to_jsonl())?;
            write(&dir.join("trace.csv"), &trace_csv(&t))?;
            Ok(res)
        })
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .min_by(|a, b| a.cost.unwrap_or(f64::INFINITY).total_cmp(&b.cost.unwrap_or(f64::INFINITY)))
        .expect("at least one seed");
    let summary = VqeSummary {
        experiment: exp.key.clone(),
        best_seed: best.seed.expect("vqe runs carry a seed"),
        flagged: best.flagged,
        runs: runs.clone(),
        metadata: Metadata::new(cfg),
    };
    let mut csv = String::from("seed,cost,iterations,evals,flagged");
    for i in 0..exp.inits.len() {
        write!(csv, ",energy_{i}")?;
    }
    csv.push('\n');
    for r in &runs {
        write!(
            csv,
            "{},{:.12},{},{},{}",
            opt_cell(r.seed),
            r.cost.unwrap_or(f64::NAN),
            opt_cell(r.iterations),
            opt_cell(r.evals),
            r.flagged
        )?;
        for e in &r.energies {
            write!(csv, ",{e:.12}")?;
        }
        csv.push('\n');
    }
    write(
        &cfg.out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    write(&cfg.out.join("summary.csv"), &csv)?;
    Ok(summary)
}

fn trained_params(exp: &Experiment, cfg: &ExperimentConfig, given: Option<&[f64]>) -> Result<Vec<f64>> {
    match given {
        Some(p) => Ok(p.to_vec()),
        None => Ok(exp.train(cfg.seed, cfg.backend.backend(cfg.seed))?.result.params),
    }
}

/// Fold, estimate per `k` and extrapolate; writes `zne.json` and `zne.csv`.
///
/// Parameters are trained from `cfg.seed` when `params` is `None`.
pub fn run_zne(cfg: &ExperimentConfig, params: Option<&[f64]>) -> Result<RunResult> {
    let exp = cfg.resolve()?;
    let theta = trained_params(&exp, cfg, params)?;
    let state = cfg.zne.state.unwrap_or(exp.report);
    let noise = NoiseModel::depolarizing(cfg.zne.p1, cfg.zne.p2);
    noise.validate()?;
    let z = exp.zne_experiment(state, &theta, noise.clone(), cfg.zne.shots, cfg.seed)?;
    let series = collect_series(&z, &cfg.zne.grid)?;
    let fit = extrapolate(&series)?;
    let cost = exp.cost_spec(Backend::Exact)?;
    let energies = cost.exact_energies(&theta)?;

    let mut res = RunResult::empty(&exp.key, cfg);
    res.seed = Some(cfg.seed);
    res.params = theta;
    res.energies = energies;
    res.targets = exp.targets.clone();
    res.flagged = is_flagged(&res.energies, &res.targets, cfg.tolerance);
    let mut csv = String::from("k,energy,stderr\n");
    for p in &series.points {
        writeln!(csv, "{},{:.12},{:.12}", p.k, p.energy, p.stderr)?;
    }
    writeln!(csv, "0,{:.12},", fit.e0)?;
    res.zne = Some(ZneOutcome {
        state,
        noise,
        shots: cfg.zne.shots,
        points: series.points,
        extrapolation: fit,
    });
    write(&cfg.out.join("zne.json"), &res.to_json())?;
    write(&cfg.out.join("zne.csv"), &csv)?;
    Ok(res)
}

/// Compile initializer plus ansatz of one output state; writes `schedule.json`.
pub fn run_compile(cfg: &ExperimentConfig, params: Option<&[f64]>) -> Result<PulseSchedule> {
    let exp = cfg.resolve()?;
    let theta = match (params, &cfg.compile.theta) {
        (Some(p), _) => p.to_vec(),
        (None, Some(t)) => t.clone(),
        (None, None) => trained_params(&exp, cfg, None)?,
    };
    let state = cfg.compile.state.unwrap_or(exp.report);
    let z = exp.zne_experiment(state, &theta, NoiseModel::noiseless(), None, cfg.seed)?;
    let circuit = z.folded_circuit(1)?;
    let schedule = compile_circuit(&circuit, &theta, &cfg.compile.timing, &cfg.compile.envelope)?;
    write(&cfg.out.join("schedule.json"), &schedule.to_json())?;
    Ok(schedule)
}
