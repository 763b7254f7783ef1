use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pelab::reproduce;
use pelab::{ExperimentConfig, Settings, Status};

/// Persistency-of-excitation certificates and uniform stability probes.
///
/// Exit codes: 0 success (an inconclusive verdict is a success), 2 when a
/// certificate op returns a counterexample, 1 on any error.
#[derive(Parser)]
#[command(name = "pelab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory [default: $PELAB_OUT, else ./pelab-out/<config name>]
    #[arg(long, env = "PELAB_OUT", global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed (used by random direction sets)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the integration step of simulate and uniformity entries
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Suppress progress output on stderr
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the certificate entries of a config
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate the config's system and write trajectories and a norm plot
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Settling-time uniformity probe
    Uniformity {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a bundled experiment: eg31, mornar, mrac-pe, mrac-nope,
    /// feedforward, driftless, slotli-pe, slotli-nope, necessity
    Reproduce {
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &PathBuf, common: &Common) -> Result<(ExperimentConfig, Settings)> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(h) = common.step {
        cfg.analysis.iter_mut().for_each(|a| a.override_step(h));
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("pelab-out").join(&cfg.name));
    Ok((cfg, Settings { out, quiet: common.quiet }))
}

fn threads(common: &Common) -> Result<()> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Certify { config, common } => {
            threads(&common)?;
            let (cfg, s) = load(&config, &common)?;
            Ok(pelab::commands::certify(&cfg, &s)?.0)
        }
        Command::Simulate { config, common } => {
            threads(&common)?;
            let (cfg, s) = load(&config, &common)?;
            pelab::commands::simulate(&cfg, &s)?;
            Ok(Status::Ok)
        }
        Command::Uniformity { config, common } => {
            threads(&common)?;
            let (cfg, s) = load(&config, &common)?;
            pelab::commands::uniformity(&cfg, &s)?;
            Ok(Status::Ok)
        }
        Command::Reproduce { name, common } => {
            threads(&common)?;
            let root = common.out.clone().unwrap_or_else(|| PathBuf::from("pelab-out"));
            let checks = reproduce::reproduce(&name, &root, common.quiet)?;
            print!("{}", reproduce::format_table(&checks));
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Counterexample) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
