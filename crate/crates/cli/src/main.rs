use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use dynmap::pipeline::Engine;

mod bundle;
mod config;
mod run;

use config::{InitialState, RunConfig};

#[derive(Parser)]
#[command(name = "dynmap", version, about = "Dynamical maps of fermionic open systems from chain-mapped baths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration (fermi-chain-fig5, siam-eq, siam-hot).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_engine)]
    engine: Option<Engine>,
    /// Worker threads for grid-parallel work.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write chain coefficients of every bath branch.
    ChainCoeffs(Common),
    /// Extract Λ(τ) and 𝓛(τ) on the time grid and analyse them.
    Extract(Common),
    /// Predict trajectories from the maps stored in a bundle.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Directory written by `extract`.
        #[arg(long)]
        bundle: PathBuf,
        /// `totally-mixed`, `vacuum`, `spin-up` or comma-separated occupations.
        #[arg(long)]
        initial_state: Option<String>,
        #[arg(long)]
        tau_generator: Option<f64>,
        #[arg(long)]
        tau_map: Option<f64>,
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Landauer–Büttiker currents and transmission.
    Lb(Common),
    /// Check a configuration, or the maps of an existing bundle.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    match s {
        "gaussian" => Ok(Engine::Gaussian),
        "ed" => Ok(Engine::Ed),
        _ => Err(format!("unknown engine `{s}` (gaussian | ed)")),
    }
}

impl Common {
    fn resolve(&self, fallback: Option<&RunConfig>) -> Result<(RunConfig, PathBuf)> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        let mut cfg = match (&self.config, &self.preset, fallback) {
            (Some(p), _, _) => RunConfig::load(p)?,
            (None, Some(n), _) => RunConfig::preset(n)?,
            (None, None, Some(c)) => c.clone(),
            (None, None, None) => bail!("pass --config <path> or --preset <name> ({})", config::preset_names()),
        };
        if let Some(e) = self.engine {
            cfg.engine = e;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        cfg.check()?;
        let out = cfg.output.clone();
        Ok((cfg, out))
    }
}

fn report(m: &bundle::Manifest) -> ExitCode {
    for c in &m.checks {
        let tag = if c.passed { "ok" } else { "FAILED" };
        println!("{:<22} {tag:<6} {:.3e} (tolerance {:.1e})", c.name, c.value, c.tolerance);
    }
    for (k, v) in &m.results {
        println!("{k}: {v}");
    }
    if m.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    Ok(match cli.command {
        Command::ChainCoeffs(c) => {
            let (cfg, out) = c.resolve(None)?;
            let m = run::chain_coeffs(&cfg, &out)?;
            println!("wrote {} chain files to {}", m.series.len(), out.display());
            report(&m)
        }
        Command::Extract(c) => {
            let (cfg, out) = c.resolve(None)?;
            let m = run::extract(&cfg, &out)?;
            println!("wrote {} maps and {} series to {}", m.maps.len(), m.series.len(), out.display());
            report(&m)
        }
        Command::Predict { common, bundle, initial_state, tau_generator, tau_map, repetitions } => {
            let source = bundle::load_manifest(&bundle)?;
            let mut fallback = source.config.clone();
            if let Some(f) = fallback.as_mut() {
                f.output = bundle.join("predict");
            }
            let (mut cfg, out) = common.resolve(fallback.as_ref())?;
            if let Some(s) = initial_state {
                cfg.predict.initial_state = match s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>() {
                    Ok(v) => InitialState::Occupations(v),
                    Err(_) => InitialState::Named(s),
                };
            }
            cfg.predict.tau_generator = tau_generator.or(cfg.predict.tau_generator);
            cfg.predict.tau_map = tau_map.or(cfg.predict.tau_map);
            cfg.predict.repetitions = repetitions.or(cfg.predict.repetitions);
            cfg.check()?;
            let m = run::predict(&cfg, &bundle, &out)?;
            println!("wrote predicted trajectories to {}", out.display());
            report(&m)
        }
        Command::Lb(c) => {
            let (cfg, out) = c.resolve(None)?;
            report(&run::lb(&cfg, &out)?)
        }
        Command::Validate { common, bundle } => match bundle {
            Some(dir) => {
                let tol = match (&common.config, &common.preset) {
                    (None, None) => dynmap::pipeline::AnalysisOptions::default().cptp_tol,
                    _ => common.resolve(None)?.0.analysis.cptp_tol,
                };
                report(&run::validate_bundle(&dir, tol)?)
            }
            None => {
                let (cfg, _) = common.resolve(None)?;
                let m = run::validate_config(&cfg)?;
                println!("configuration ok: {} modes, chain lengths {:?}", m.n_modes, m.chain_lengths);
                report(&m)
            }
        },
    })
}
