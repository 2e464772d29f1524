//! `sfslab`: run the protocols, the adversary and incompressibility
//! experiments, and inspect transcripts from the command line.
//!
//! Every command prints JSON lines on stdout. Logs go to stderr and are
//! controlled by `RUST_LOG`.

mod config;
mod experiments;
mod inputs;
mod sessions;
mod tools;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use sfslab_core::seed::{seed_from_u64, Seed};
use sfslab_protocols::runtime::{Channel, Transcript};

use config::Config;

#[derive(Parser, Debug)]
#[command(
    name = "sfslab",
    version,
    about = "Succinct state sampling, verifiable garbling and 2PC on a simulated quantum channel"
)]
struct Cli {
    /// Master seed; every random choice of a run derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the session transcript here as JSON lines.
    #[arg(long, global = true)]
    transcript: Option<PathBuf>,
    /// Flat key = value file supplying defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Carry the session over loopback TCP instead of in-process channels.
    #[arg(long, global = true)]
    tcp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One SFS session between the honest client and a chosen server.
    Sfs(sessions::SfsArgs),
    /// Verifiable garbling of a circuit on a client input.
    Sfvp(sessions::SfvpArgs),
    /// Verifiable garbling with a committed input and an argument of knowledge.
    Sfvp2(sessions::Sfvp2Args),
    /// Two-party computation from two SFVP2 sessions.
    Twopc(sessions::TwopcArgs),
    /// Monte-Carlo soundness experiment against a server adversary.
    Attack(experiments::AttackArgs),
    /// Compression experiment against the counting bound.
    Impossibility(experiments::ImpossibilityArgs),
    /// Garble a circuit and optionally write the package.
    Garble(tools::GarbleArgs),
    /// Summarize a transcript file.
    Report(tools::ReportArgs),
}

/// Settings shared by every command after merging flags with the config file.
pub struct Ctx {
    pub cfg: Config,
    pub seed: Seed,
    pub transcript: Option<PathBuf>,
    pub channel: Channel,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self> {
        let cfg = match &cli.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let seed = cfg.get(cli.seed, "seed", 0u64)?;
        let transcript = cfg.opt(cli.transcript.clone(), "transcript")?;
        let channel = if cfg.switch(cli.tcp, "tcp")? { Channel::tcp_loopback() } else { Channel::InProcess };
        Ok(Self { cfg, seed: seed_from_u64(seed), transcript, channel })
    }

    pub fn save_transcript(&self, t: &Transcript) -> Result<()> {
        if let Some(path) = &self.transcript {
            std::fs::write(path, t.to_jsonl())?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<Vec<String>> {
    let ctx = Ctx::new(&cli)?;
    match &cli.command {
        Command::Sfs(a) => sessions::sfs(&ctx, a),
        Command::Sfvp(a) => sessions::sfvp(&ctx, a),
        Command::Sfvp2(a) => sessions::sfvp2(&ctx, a),
        Command::Twopc(a) => sessions::twopc(&ctx, a),
        Command::Attack(a) => experiments::attack(&ctx, a),
        Command::Impossibility(a) => experiments::impossibility(&ctx, a),
        Command::Garble(a) => tools::garble(&ctx, a),
        Command::Report(a) => tools::report(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
