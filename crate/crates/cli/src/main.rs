//! `bergman-lab <verb> --config <file> [--out <dir>] [--threads k] [--seed s]`

mod algebra;
mod config;
mod error;
mod lab;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use bergman_core::expansion::Check;
use bergman_core::jets::AnyJets;
use clap::Parser;

use crate::config::{RunConfig, Verb};
use crate::error::{CliError, Result};
use crate::manifest::Artifacts;

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Bergman kernel expansion coefficients and their numerical checks")]
struct Cli {
    #[arg(value_enum)]
    verb: Verb,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    threads: Option<usize>,
    /// Start-vector seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: &Cli) -> Result<(Vec<Check>, PathBuf)> {
    let cfg = RunConfig::load(&cli.config)?;
    cfg.check(cli.verb)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let threads = cli.threads.or(cfg.threads).unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let out = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let mut art = Artifacts::new(&out, format!("{:?}", cli.verb).to_lowercase(), seed, rayon::current_num_threads())?;
    art.input(&cli.config)?;

    let checks = match cli.verb {
        Verb::Expand | Verb::Verify => {
            let jets = algebra::load_jets(&cfg, &mut art)?;
            let verify = cli.verb == Verb::Verify;
            match &jets {
                AnyJets::Rational(j) if verify => algebra::verify(j, &cfg, &mut art),
                AnyJets::Pi(j) if verify => algebra::verify(j, &cfg, &mut art),
                AnyJets::Float(j) if verify => algebra::verify(j, &cfg, &mut art),
                AnyJets::Rational(j) => algebra::expand(j, &cfg, &mut art),
                AnyJets::Pi(j) => algebra::expand(j, &cfg, &mut art),
                AnyJets::Float(j) => algebra::expand(j, &cfg, &mut art),
            }?
        }
        Verb::Spectrum => lab::spectrum(&cfg, seed, &mut art)?,
        Verb::Bergman => lab::bergman(&cfg, seed, &mut art)?,
        Verb::Dos => lab::dos(&cfg, seed, &mut art)?,
        Verb::Embed => lab::embed(&cfg, seed, &mut art)?,
    };
    let manifest = art.finish()?;
    let failed = checks.iter().filter(|c| !c.ok).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed { failed, total: checks.len() });
    }
    Ok((checks, manifest))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((checks, manifest)) => {
            let verb = format!("{:?}", cli.verb).to_lowercase();
            if checks.is_empty() {
                println!("{verb}: wrote {}", manifest.display());
            } else {
                println!("{verb}: {} checks passed, wrote {}", checks.len(), manifest.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
