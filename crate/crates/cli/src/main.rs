//! `fracorder`: forward simulation, synthetic observation, order recovery and
//! self-verification for the time-fractional subdiffusion problem.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{Driver, Failure, ObservationFile, Overrides, RunConfig};
use verify::Fault;

#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field u(x, t) on the configured grid: forward.csv and report.json
    Forward(Common),
    /// First-mode observation at t0: observation.json
    Observe(Common),
    /// Recover the order from d0 or an observation file: inversion.json
    Invert {
        #[command(flatten)]
        common: Common,
        /// Observation JSON with t0, d0 and phi1; replaces t0/d0 from the config
        #[arg(long)]
        observation: Option<PathBuf>,
    },
    /// Forward, observe and invert in one run: report.json
    Roundtrip(Common),
    /// Run the self-check suite: report.json and curve.csv
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    t0: Option<f64>,
    /// Second observation time for the consistency check
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self, driver: Driver) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None if driver == Driver::None => RunConfig::verify_default(),
            None => anyhow::bail!("--config is required"),
        };
        cfg.apply(&Overrides {
            t0: self.t0,
            t1: self.t1,
            rho: self.rho,
            d0: self.d0,
            modes: self.modes,
            out: self.out.clone(),
        });
        cfg.validate(driver)?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Forward(c) => commands::forward(&c.load(Driver::Order).context(Failure::Config)?),
        Command::Observe(c) => commands::observe(&c.load(Driver::Order).context(Failure::Config)?),
        Command::Roundtrip(c) => commands::roundtrip(&c.load(Driver::Order).context(Failure::Config)?),
        Command::Invert { common, observation } => {
            let driver = if observation.is_some() { Driver::None } else { Driver::Measurement };
            let cfg = common.load(driver).context(Failure::Config)?;
            let obs = match &observation {
                Some(path) => {
                    if cfg.rho.is_some() || cfg.d0.is_some() {
                        return Err(anyhow::anyhow!("--observation excludes rho and d0 in the config"))
                            .context(Failure::Config);
                    }
                    Some(ObservationFile::load(path).context(Failure::Config)?)
                }
                None => None,
            };
            commands::invert(&cfg, obs)
        }
        Command::Verify { common, inject_fault } => {
            verify::verify(&common.load(Driver::None).context(Failure::Config)?, inject_fault)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Failure>().map_or(1, |f| f.exit_code());
            ExitCode::from(code)
        }
    }
}
