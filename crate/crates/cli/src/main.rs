use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use spinspec_cli::{parse_envelope, run_compile, run_spectrum, run_vqe, run_zne, ExperimentConfig, RunResult};

#[derive(Parser)]
#[command(name = "spinspec", version, about = "Variational spectroscopy of spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact spectrum with quantum-number labels.
    Spectrum(Common),
    /// Train the variational circuit for every seed.
    Vqe(Common),
    /// Zero-noise extrapolation of a trained circuit.
    Zne {
        #[command(flatten)]
        common: Common,
        /// `result.json` of an earlier run supplying the parameters.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Compile a trained circuit to a pulse schedule.
    Compile {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Envelope overrides, e.g. `eps=2,tau=60`.
        #[arg(long)]
        envelope: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in experiment key, e.g. `heis4/S1`.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.experiment, self.seed) {
            (Some(path), _, _) => ExperimentConfig::load(path)?,
            (None, Some(key), Some(seed)) => ExperimentConfig::for_key(key, seed),
            (None, Some(_), None) => bail!("--seed is required without --config"),
            (None, None, _) => bail!("either --config or --experiment is required"),
        };
        if let Some(key) = &self.experiment {
            cfg.experiment = Some(key.clone());
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.seeds {
            cfg.seeds = n;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        Ok(cfg)
    }
}

fn load_params(path: &Option<PathBuf>) -> Result<Option<Vec<f64>>> {
    path.as_ref().map(|p| Ok(RunResult::load(p)?.params)).transpose()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Spectrum(c) => {
            let res = run_spectrum(&c.config()?)?;
            for (i, e) in res.energies.iter().enumerate() {
                println!("{i:>4} {e:>14.8}");
            }
            Ok(res.flagged)
        }
        Command::Vqe(c) => {
            let s = run_vqe(&c.config()?)?;
            for r in &s.runs {
                println!(
                    "seed {:>4}  cost {:>14.8}  energies {:?}{}",
                    r.seed.unwrap_or_default(),
                    r.cost.unwrap_or(f64::NAN),
                    r.energies,
                    if r.flagged { "  FLAGGED" } else { "" }
                );
            }
            println!("best seed {}", s.best_seed);
            Ok(s.flagged)
        }
        Command::Zne { common, params } => {
            let res = run_zne(&common.config()?, load_params(&params)?.as_deref())?;
            if let Some(z) = &res.zne {
                for p in &z.points {
                    println!("k {:>2}  E {:>14.8} ± {:.2e}", p.k, p.energy, p.stderr);
                }
                println!("E(0) {:>14.8}", z.extrapolation.e0);
            }
            Ok(res.flagged)
        }
        Command::Compile { common, params, envelope } => {
            let mut cfg = common.config()?;
            if let Some(spec) = envelope {
                cfg.compile.envelope = parse_envelope(&spec, cfg.compile.envelope)?;
            }
            let s = run_compile(&cfg, load_params(&params)?.as_deref())?;
            println!(
                "{} events, {} ns, {} single-qubit and {} CZ cycles",
                s.events.len(),
                s.duration,
                s.one_qubit_cycles,
                s.two_qubit_cycles
            );
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
