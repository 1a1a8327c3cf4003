//! Nelder–Mead, Adam and the hybrid schedule that chains them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform draw in `[−π/2, π/2]` per parameter.
pub fn init_parameters(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = std::f64::consts::FRAC_PI_2;
    (0..n).map(|_| rng.random_range(-h..=h)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    NelderMead,
    Adam,
}

/// One optimizer iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cost: f64,
    pub params: Vec<f64>,
    pub phase: Phase,
    /// Cumulative cost evaluations so far.
    pub evals: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainingTrace {
    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cost).collect()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimResult {
    pub params: Vec<f64>,
    pub cost: f64,
    pub trace: TrainingTrace,
    pub evals: usize,
}

/// How the vertices other than `x0` are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimplexInit {
    /// Every coordinate uniform in `[−half_width, half_width]`.
    Uniform { half_width: f64 },
    /// `x0` moved along one axis by a random step in `[step/2, step]`.
    Axis { step: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadConfig {
    pub max_iters: usize,
    pub simplex: SimplexInit,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            simplex: SimplexInit::Uniform {
                half_width: std::f64::consts::FRAC_PI_2,
            },
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub max_iters: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Stop once the gradient norm drops below this.
    pub gradient_tolerance: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            learning_rate: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            gradient_tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    /// Nelder–Mead iterations before switching to Adam.
    pub switch_after: usize,
    pub nelder_mead: NelderMeadConfig,
    pub adam: AdamConfig,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            switch_after: 14,
            nelder_mead: NelderMeadConfig::default(),
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    NelderMead(NelderMeadConfig),
    Adam(AdamConfig),
    Hybrid(HybridConfig),
}

struct Counter<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counter<F> {
    fn call(&mut self, x: &[f64]) -> Result<f64> {
        self.evals += 1;
        let v = (self.f)(x)?;
        if !v.is_finite() {
            return Err(Error::InvalidOptimizer(format!("cost evaluated to {v}")));
        }
        Ok(v)
    }
}

/// Derivative-free simplex search (reflection 1, expansion 2, contraction ½, shrink ½).
pub fn nelder_mead<F>(f: F, x0: &[f64], cfg: &NelderMeadConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut trace = TrainingTrace::default();
    let (x, c, evals) = nelder_mead_inner(f, x0, cfg, 0, &mut trace)?;
    Ok(OptimResult {
        params: x,
        cost: c,
        trace,
        evals,
    })
}

fn nelder_mead_inner<F>(
    f: F,
    x0: &[f64],
    cfg: &NelderMeadConfig,
    first_iter: usize,
    trace: &mut TrainingTrace,
) -> Result<(Vec<f64>, f64, usize)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidOptimizer("no parameters to optimize".into()));
    }
    let mut f = Counter { f, evals: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Stream 0 is used by `init_parameters`.
    rng.set_stream(1);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f.call(x0)?));
    for i in 0..n {
        let x = match cfg.simplex {
            SimplexInit::Uniform { half_width } => (0..n).map(|_| rng.random_range(-half_width..=half_width)).collect(),
            SimplexInit::Axis { step } => {
                let mut x = x0.to_vec();
                let s: f64 = rng.random_range(0.5..1.0) * step;
                x[i] += if rng.random_bool(0.5) { s } else { -s };
                x
            }
        };
        let v = f.call(&x)?;
        simplex.push((x, v));
    }
    let centroid = |s: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        for (x, _) in &s[..n] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        c
    };
    let along = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect()
    };
    for it in 0..cfg.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        trace.push(TraceRecord {
            iteration: first_iter + it,
            cost: simplex[0].1,
            params: simplex[0].0.clone(),
            phase: Phase::NelderMead,
            evals: f.evals,
        });
        if spread.abs() < cfg.tolerance {
            break;
        }
        let c = centroid(&simplex);
        let worst = simplex[n].clone();
        let xr = along(&c, &worst.0, -1.0);
        let fr = f.call(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(&c, &worst.0, -2.0);
            let fe = f.call(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(&c, &xr, 0.5);
                let fc = f.call(&xc)?;
                (xc, fc)
            } else {
                let xc = along(&c, &worst.0, 0.5);
                let fc = f.call(&xc)?;
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    v.0 = along(&best, &v.0, 0.5);
                    v.1 = f.call(&v.0)?;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, c) = simplex.swap_remove(0);
    Ok((x, c, f.evals))
}

/// Adam with bias correction; returns the best point seen.
pub fn adam<F, G>(f: F, grad: G, x0: &[f64], cfg: &AdamConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut trace = TrainingTrace::default();
    let (x, c, evals) = adam_inner(f, grad, x0, cfg, 0, 0, &mut trace)?;
    Ok(OptimResult {
        params: x,
        cost: c,
        trace,
        evals,
    })
}

fn adam_inner<F, G>(
    f: F,
    mut grad: G,
    x0: &[f64],
    cfg: &AdamConfig,
    first_iter: usize,
    prior_evals: usize,
    trace: &mut TrainingTrace,
) -> Result<(Vec<f64>, f64, usize)>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if !(cfg.learning_rate > 0.0) || !(0.0..1.0).contains(&cfg.beta1) || !(0.0..1.0).contains(&cfg.beta2) {
        return Err(Error::InvalidOptimizer("Adam hyperparameters out of range".into()));
    }
    let mut f = Counter { f, evals: 0 };
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut cost = f.call(&x)?;
    let (mut best_x, mut best) = (x.clone(), cost);
    for t in 1..=cfg.max_iters {
        trace.push(TraceRecord {
            iteration: first_iter + t - 1,
            cost,
            params: x.clone(),
            phase: Phase::Adam,
            evals: prior_evals + f.evals,
        });
        let g = grad(&x)?;
        if g.len() != n {
            return Err(Error::ParameterLength {
                expected: n,
                got: g.len(),
            });
        }
        if g.iter().map(|v| v * v).sum::<f64>().sqrt() < cfg.gradient_tolerance {
            break;
        }
        let (c1, c2) = (1.0 - cfg.beta1.powi(t as i32), 1.0 - cfg.beta2.powi(t as i32));
        for i in 0..n {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            x[i] -= cfg.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.epsilon);
        }
        cost = f.call(&x)?;
        if cost < best {
            best = cost;
            best_x.clone_from(&x);
        }
    }
    Ok((best_x, best, f.evals))
}

/// Nelder–Mead for `switch_after` iterations, then Adam from its best vertex.
pub fn hybrid<F, G>(mut f: F, grad: G, x0: &[f64], cfg: &HybridConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut trace = TrainingTrace::default();
    let nm = NelderMeadConfig {
        max_iters: cfg.switch_after,
        ..cfg.nelder_mead
    };
    let (x1, _, e1) = nelder_mead_inner(&mut f, x0, &nm, 0, &mut trace)?;
    let start = trace.records.len();
    let (x, c, e2) = adam_inner(&mut f, grad, &x1, &cfg.adam, start, e1, &mut trace)?;
    Ok(OptimResult {
        params: x,
        cost: c,
        trace,
        evals: e1 + e2,
    })
}

impl Optimizer {
    pub fn minimize<F, G>(&self, f: F, grad: G, x0: &[f64]) -> Result<OptimResult>
    where
        F: FnMut(&[f64]) -> Result<f64>,
        G: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        match self {
            Optimizer::NelderMead(c) => nelder_mead(f, x0, c),
            Optimizer::Adam(c) => adam(f, grad, x0, c),
            Optimizer::Hybrid(c) => hybrid(f, grad, x0, c),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            Optimizer::NelderMead(c) => c.seed = seed,
            Optimizer::Hybrid(c) => c.nelder_mead.seed = seed,
            Optimizer::Adam(_) => {}
        }
        self
    }
}
