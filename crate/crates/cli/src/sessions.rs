//! Single protocol sessions: `sfs`, `sfvp`, `sfvp2` and `twopc`.

use std::sync::Arc;

use anyhow::{anyhow, bail, Result};
use clap::Args;
use serde_json::json;
use sfslab_core::circuits::{BoolFunction, Circuit};
use sfslab_core::garbling::{Garbler, Suite};
use sfslab_core::seed;
use sfslab_core::Bits;
use sfslab_protocols::adversaries::{expander, server_adversary};
use sfslab_protocols::runtime::Transcript;
use sfslab_protocols::sfs::{default_eps0, run_sfs, Mode, SfsParams, Stage};
use sfslab_protocols::sfvp::{client_adversary, run_sfvp, run_sfvp2, Sfvp2Params, Sfvp2Setup, SfvpParams};
use sfslab_protocols::succ_test::AokBackend;
use sfslab_protocols::twopc::{run_twopc, PartyImpl, TwopcParams, DEFAULT_FEISTEL_ROUNDS, DEFAULT_GARBLE_KAPPA};

use crate::inputs::{load_circuit, parse_input};
use crate::Ctx;

/// SFS settings shared by every session command.
#[derive(Args, Debug, Default)]
pub struct SfsOpts {
    /// Security parameter of the sampling protocol.
    #[arg(long)]
    kappa: Option<usize>,
    /// Target tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// Single-round soundness level; defaults to delta^(1/4).
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Server behavior: honest, copying, single-branch, witness-swap, garbage-comp.
    #[arg(long)]
    adversary: Option<String>,
    /// Caps every loop of the round plan.
    #[arg(long = "rounds-cap")]
    rounds_cap: Option<usize>,
    /// test, comp, temp, full or schedule:T.
    #[arg(long)]
    stage: Option<String>,
    /// Argument backend: reveal or merkle.
    #[arg(long)]
    backend: Option<String>,
}

impl SfsOpts {
    fn apply(&self, ctx: &Ctx, p: &mut SfsParams, default_stage: Stage) -> Result<()> {
        let cfg = &ctx.cfg;
        p.kappa = cfg.get(self.kappa, "kappa", p.kappa)?;
        p.eps = cfg.get(self.eps, "eps", p.eps)?;
        p.delta = cfg.get(self.delta, "delta", p.delta)?;
        p.eps0 = cfg.get(self.eps0, "eps0", default_eps0(p.delta))?;
        p.rounds_cap = cfg.opt(self.rounds_cap, "rounds-cap")?;
        if let Some(s) = cfg.opt(self.stage.clone(), "stage")? {
            p.stage = Stage::parse(&s).ok_or_else(|| anyhow!("unknown stage {s}"))?;
        } else {
            p.stage = default_stage;
        }
        if let Some(b) = cfg.opt(self.backend.clone(), "backend")? {
            p.backend = AokBackend::parse(&b).ok_or_else(|| anyhow!("unknown backend {b}"))?;
        }
        Ok(())
    }

    fn adversary(&self, ctx: &Ctx) -> Result<String> {
        ctx.cfg.get(self.adversary.clone(), "adversary", "honest".to_string())
    }
}

fn backend_name(b: AokBackend) -> &'static str {
    match b {
        AokBackend::Reveal => "reveal",
        AokBackend::MerkleOracle { .. } => "merkle",
    }
}

fn bytes_json(t: &Transcript) -> serde_json::Value {
    json!({
        "frames": t.entries.len(),
        "forward": t.forward_bytes(),
        "backward": t.backward_bytes(),
        "total": t.total_bytes(),
    })
}

fn opt_bits(b: &Option<Bits>) -> serde_json::Value {
    b.as_ref().map_or(serde_json::Value::Null, |b| b.to_string().into())
}

#[derive(Args, Debug)]
pub struct SfsArgs {
    /// Input length of the default expander function.
    #[arg(long)]
    n: Option<usize>,
    /// Output length of the default expander function.
    #[arg(long)]
    m: Option<usize>,
    /// Sample a circuit file or built-in instead of the expander.
    #[arg(long)]
    circuit: Option<String>,
    #[command(flatten)]
    opts: SfsOpts,
}

pub fn sfs(ctx: &Ctx, a: &SfsArgs) -> Result<Vec<String>> {
    let f: Arc<dyn BoolFunction> = match ctx.cfg.opt(a.circuit.clone(), "circuit")? {
        Some(spec) => Arc::new(load_circuit(&spec)?),
        None => expander(ctx.cfg.get(a.n, "n", 8)?, ctx.cfg.get(a.m, "m", 256)?),
    };
    let mut p = SfsParams::for_fn(f.as_ref(), 16);
    a.opts.apply(ctx, &mut p, Stage::Temp)?;
    let adversary = a.opts.adversary(ctx)?;
    let run = run_sfs(&ctx.channel, &p, f, server_adversary(&adversary)?, &ctx.seed)?;
    ctx.save_transcript(&run.transcript)?;
    let c = &run.client;
    let count = |pred: &dyn Fn(Mode) -> bool| c.rounds.iter().filter(|r| pred(r.mode)).count();
    let line = json!({
        "command": "sfs",
        "n": p.n,
        "m": p.m,
        "kappa": p.kappa,
        "stage": p.stage.to_string(),
        "backend": backend_name(p.backend),
        "adversary": adversary,
        "client_flag": c.flag,
        "server_flag": run.server.flag,
        "rounds": c.rounds.len(),
        "test_rounds": count(&|m| matches!(m, Mode::Test(_))),
        "comp_rounds": count(&|m| m == Mode::Comp),
        "first_failure": c.first_failure().map(|f| format!("{f:?}")),
        "selected": c.selected,
        "x": opt_bits(&c.x_out),
        "y_hex": run.server.y_out.as_ref().map(Bits::to_hex),
        "bytes": bytes_json(&run.transcript),
    });
    Ok(vec![line.to_string()])
}

#[derive(Args, Debug)]
pub struct SfvpArgs {
    /// Circuit file or built-in name.
    #[arg(long)]
    circuit: Option<String>,
    /// Client input: hex digits MSB-first, or 0b followed by binary digits.
    #[arg(long)]
    x: Option<String>,
    #[command(flatten)]
    opts: SfsOpts,
}

fn sfvp_params(ctx: &Ctx, opts: &SfsOpts) -> Result<SfvpParams> {
    let mut p = SfvpParams::new(8);
    opts.apply(ctx, &mut p.sfs, Stage::Comp)?;
    p.garbler = Garbler::sha256(p.sfs.kappa);
    Ok(p)
}

fn circuit_and_input(ctx: &Ctx, circuit: &Option<String>, x: &Option<String>) -> Result<(Circuit, Bits)> {
    let c = load_circuit(&ctx.cfg.require(circuit.clone(), "circuit")?)?;
    let x = parse_input(&ctx.cfg.require(x.clone(), "x")?, c.n_inputs())?;
    Ok((c, x))
}

pub fn sfvp(ctx: &Ctx, a: &SfvpArgs) -> Result<Vec<String>> {
    let (c, x) = circuit_and_input(ctx, &a.circuit, &a.x)?;
    let p = sfvp_params(ctx, &a.opts)?;
    let adversary = a.opts.adversary(ctx)?;
    let run = run_sfvp(&ctx.channel, &p, &c, &x, server_adversary(&adversary)?, &ctx.seed)?;
    ctx.save_transcript(&run.transcript)?;
    let expected = c.eval(&x)?;
    let line = json!({
        "command": "sfvp",
        "n": c.n_inputs(),
        "gates": c.gates().len(),
        "kappa": p.sfs.kappa,
        "stage": p.sfs.stage.to_string(),
        "backend": backend_name(p.sfs.backend),
        "adversary": adversary,
        "client_flag": run.client.flag,
        "server_flag": run.server.flag,
        "y": opt_bits(&run.server.y),
        "expected": expected.to_string(),
        "correct": run.server.y.as_ref() == Some(&expected),
        "bytes": bytes_json(&run.transcript),
    });
    Ok(vec![line.to_string()])
}

#[derive(Args, Debug)]
pub struct Sfvp2Args {
    #[arg(long)]
    circuit: Option<String>,
    #[arg(long)]
    x: Option<String>,
    /// Seed for the public commitment parameters and opening; derived from --seed if absent.
    #[arg(long = "commit-seed")]
    commit_seed: Option<u64>,
    /// Client behavior: honest or input-swap.
    #[arg(long = "client-adversary")]
    client_adversary: Option<String>,
    /// Overrides the number of argument rounds.
    #[arg(long = "aok-cap")]
    aok_cap: Option<usize>,
    #[command(flatten)]
    opts: SfsOpts,
}

pub fn sfvp2(ctx: &Ctx, a: &Sfvp2Args) -> Result<Vec<String>> {
    let cfg = &ctx.cfg;
    let (c, x) = circuit_and_input(ctx, &a.circuit, &a.x)?;
    let mut p = Sfvp2Params::new(sfvp_params(ctx, &a.opts)?);
    if let Some(cap) = cfg.opt(a.aok_cap, "aok-cap")? {
        p = p.with_aok_cap(cap);
    }
    let commit_seed = match cfg.opt(a.commit_seed, "commit-seed")? {
        Some(s) => seed::seed_from_u64(s),
        None => seed::derive(&ctx.seed, &["commit"]),
    };
    let setup = Sfvp2Setup::new(x.clone(), p.sfvp.sfs.kappa, &mut seed::rng(&commit_seed))?;
    let client_name = cfg.get(a.client_adversary.clone(), "client-adversary", "honest".to_string())?;
    let server_name = a.opts.adversary(ctx)?;
    let run = run_sfvp2(
        &ctx.channel,
        &p,
        &c,
        &setup,
        client_adversary(&client_name)?,
        server_adversary(&server_name)?,
        &ctx.seed,
    )?;
    ctx.save_transcript(&run.transcript)?;
    let expected = c.eval(&x)?;
    let line = json!({
        "command": "sfvp2",
        "n": c.n_inputs(),
        "gates": c.gates().len(),
        "kappa": p.sfvp.sfs.kappa,
        "stage": p.sfvp.sfs.stage.to_string(),
        "backend": backend_name(p.sfvp.sfs.backend),
        "aok_rounds": p.rounds()?,
        "client_adversary": client_name,
        "adversary": server_name,
        "client_flag": run.client.flag,
        "server_accepted": run.client.server_accepted,
        "server_flag": run.server.flag,
        "rounds_passed": run.server.rounds_passed,
        "y": opt_bits(&run.server.y),
        "expected": expected.to_string(),
        "correct": run.server.y.as_ref() == Some(&expected),
        "bytes": bytes_json(&run.transcript),
    });
    Ok(vec![line.to_string()])
}

#[derive(Args, Debug)]
pub struct TwopcArgs {
    /// Alice's output circuit over x_A ‖ x_B.
    #[arg(long)]
    fa: Option<String>,
    /// Bob's output circuit over x_A ‖ x_B.
    #[arg(long)]
    fb: Option<String>,
    #[arg(long)]
    xa: Option<String>,
    #[arg(long)]
    xb: Option<String>,
    /// Alice's input length; defaults to half the circuit inputs.
    #[arg(long)]
    na: Option<usize>,
    /// Label length of the garbling scheme.
    #[arg(long = "garble-kappa")]
    garble_kappa: Option<usize>,
    /// Rounds of the Feistel cipher used for garbling.
    #[arg(long = "feistel-rounds")]
    feistel_rounds: Option<usize>,
    #[arg(long = "aok-cap")]
    aok_cap: Option<usize>,
    /// Bob's behavior as the client of the first direction: honest or input-swap.
    /// `--adversary` sets his behavior as the server of the second.
    #[arg(long = "client-adversary")]
    client_adversary: Option<String>,
    #[command(flatten)]
    opts: SfsOpts,
}

pub fn twopc(ctx: &Ctx, a: &TwopcArgs) -> Result<Vec<String>> {
    let cfg = &ctx.cfg;
    let f_a = load_circuit(&cfg.require(a.fa.clone(), "fa")?)?;
    let f_b = load_circuit(&cfg.require(a.fb.clone(), "fb")?)?;
    let n = f_a.n_inputs();
    if f_b.n_inputs() != n {
        bail!("fa takes {n} inputs but fb takes {}", f_b.n_inputs());
    }
    let n_a = match cfg.opt(a.na, "na")? {
        Some(v) => v,
        None if n % 2 == 0 => n / 2,
        None => bail!("circuits take an odd number of inputs; give --na"),
    };
    if n_a > n {
        bail!("--na {n_a} exceeds the {n} circuit inputs");
    }
    let x_a = parse_input(&cfg.require(a.xa.clone(), "xa")?, n_a)?;
    let x_b = parse_input(&cfg.require(a.xb.clone(), "xb")?, n - n_a)?;

    let mut p = TwopcParams::new(n_a, n - n_a);
    let gk = cfg.get(a.garble_kappa, "garble-kappa", DEFAULT_GARBLE_KAPPA)?;
    let rounds = cfg.get(a.feistel_rounds, "feistel-rounds", DEFAULT_FEISTEL_ROUNDS)?;
    p.garbler = Garbler::new(gk, Suite::Feistel { rounds });
    let mut sfvp = p.sfvp2.sfvp.clone();
    a.opts.apply(ctx, &mut sfvp.sfs, Stage::Comp)?;
    p.eps = sfvp.sfs.eps;
    p.sfvp2 = Sfvp2Params::new(sfvp);
    if let Some(cap) = cfg.opt(a.aok_cap, "aok-cap")? {
        p.sfvp2 = p.sfvp2.with_aok_cap(cap);
    }
    let bob = PartyImpl {
        as_client: client_adversary(&cfg.get(a.client_adversary.clone(), "client-adversary", "honest".to_string())?)?,
        as_server: server_adversary(&a.opts.adversary(ctx)?)?,
    };
    let run = run_twopc(&ctx.channel, &p, &x_a, &x_b, &f_a, &f_b, &PartyImpl::honest(), &bob, &ctx.seed)?;
    ctx.save_transcript(&run.transcript)?;
    let x = Bits::concat([&x_a, &x_b]);
    let (ya, yb) = (f_a.eval(&x)?, f_b.eval(&x)?);
    let line = json!({
        "command": "twopc",
        "na": n_a,
        "nb": n - n_a,
        "garble_kappa": gk,
        "kappa": p.sfvp2.sfvp.sfs.kappa,
        "stage": p.sfvp2.sfvp.sfs.stage.to_string(),
        "step1_bits": run.step1.total_bits(),
        "alice": {"flag": run.alice.flag, "y": opt_bits(&run.alice.y), "expected": ya.to_string()},
        "bob": {"flag": run.bob.flag, "y": opt_bits(&run.bob.y), "expected": yb.to_string()},
        "correct": run.alice.y.as_ref() == Some(&ya) && run.bob.y.as_ref() == Some(&yb),
        "bytes": bytes_json(&run.transcript),
    });
    Ok(vec![line.to_string()])
}
