//! Monte-Carlo experiments: `attack` and `impossibility`.

use anyhow::{anyhow, bail, Result};
use clap::Args;
use serde_json::json;
use sfslab_core::impossibility::{
    optimal_decompressor_exhaustive, run_incompressibility_experiment, shipped_pairs, InputSource, MAX_EXHAUSTIVE_M,
};
use sfslab_core::seed;
use sfslab_core::Bits;
use sfslab_protocols::adversaries::{run_soundness_experiment, ExperimentProtocol, ExperimentSpec};
use sfslab_protocols::succ_test::AokBackend;

use crate::Ctx;

#[derive(Args, Debug)]
pub struct AttackArgs {
    /// sfs-test, sfs-test-hadamard, sfs-test-computational, sfs-comp or sfs-schedule:T.
    #[arg(long)]
    protocol: Option<String>,
    /// Server adversary name.
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    kappa: Option<usize>,
    /// Argument backend: reveal or merkle.
    #[arg(long)]
    backend: Option<String>,
}

pub fn attack(ctx: &Ctx, a: &AttackArgs) -> Result<Vec<String>> {
    let cfg = &ctx.cfg;
    let name = cfg.get(a.protocol.clone(), "protocol", "sfs-test".to_string())?;
    let protocol = ExperimentProtocol::parse(&name).ok_or_else(|| anyhow!("unknown protocol {name}"))?;
    let mut spec =
        ExperimentSpec::new(protocol, cfg.get(a.n, "n", 8)?, cfg.get(a.m, "m", 256)?, cfg.get(a.kappa, "kappa", 16)?);
    if let Some(b) = cfg.opt(a.backend.clone(), "backend")? {
        spec = spec.with_backend(AokBackend::parse(&b).ok_or_else(|| anyhow!("unknown backend {b}"))?);
    }
    let adversary = cfg.get(a.adversary.clone(), "adversary", "honest".to_string())?;
    let trials = cfg.get(a.trials, "trials", 1000)?;
    if ctx.transcript.is_some() {
        log::warn!("attack runs many sessions; no transcript is written");
    }
    let report = run_soundness_experiment(&spec, &adversary, trials, &ctx.seed)?;
    Ok(vec![report.to_json_line()])
}

#[derive(Args, Debug)]
pub struct ImpossibilityArgs {
    /// Compressed length.
    #[arg(long)]
    t: Option<usize>,
    /// Input length.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// uniform, or prg:L for generator outputs on L-bit seeds.
    #[arg(long)]
    source: Option<String>,
}

fn parse_source(s: &str) -> Result<InputSource> {
    if s == "uniform" {
        return Ok(InputSource::Uniform);
    }
    match s.strip_prefix("prg:").and_then(|l| l.parse().ok()) {
        Some(seed_len) => Ok(InputSource::PrgImage { seed_len }),
        None => bail!("unknown source {s}; use uniform or prg:L"),
    }
}

pub fn impossibility(ctx: &Ctx, a: &ImpossibilityArgs) -> Result<Vec<String>> {
    let cfg = &ctx.cfg;
    let t = cfg.get(a.t, "t", 8)?;
    let m = cfg.get(a.m, "m", 16)?;
    if t >= m {
        bail!("need t < m (t = {t}, m = {m})");
    }
    let trials = cfg.get(a.trials, "trials", 10_000)?;
    let source_name = cfg.get(a.source.clone(), "source", "uniform".to_string())?;
    let source = parse_source(&source_name)?;
    let mut lines = Vec::new();
    for pair in shipped_pairs(t, m) {
        let mut rng = seed::rng(&seed::derive(&ctx.seed, &["impossibility", &pair.name()]));
        let r = run_incompressibility_experiment(pair.as_ref(), source, trials, &mut rng);
        // The exhaustive optimum is defined for deterministic compressors only.
        let optimum = if pair.coin_len() == 0 && m <= MAX_EXHAUSTIVE_M {
            let compress = |u: &Bits| pair.compress(u, &Bits::new());
            Some(optimal_decompressor_exhaustive(&compress, t, m)?)
        } else {
            None
        };
        lines.push(
            json!({
                "command": "impossibility",
                "pair": r.pair,
                "source": source_name,
                "t": r.t,
                "m": r.m,
                "trials": r.trials,
                "successes": r.successes,
                "rate": r.rate(),
                "bound": r.bound(),
                "sigma": r.sigma(),
                "within_bound": r.within_bound(),
                "exhaustive_optimum": optimum,
            })
            .to_string(),
        );
    }
    Ok(lines)
}
