//! Offline tools: `garble` and `report`.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde_json::json;
use sfslab_core::garbling::{GarbledPackage, Garbler, Suite};
use sfslab_core::seed;
use sfslab_core::Bits;
use sfslab_protocols::runtime::{Direction, GroupBy, ReportRow, Transcript};

use crate::inputs::{load_circuit, parse_input};
use crate::Ctx;

#[derive(Args, Debug)]
pub struct GarbleArgs {
    /// Circuit file or built-in name.
    #[arg(long)]
    circuit: Option<String>,
    /// Input to encode alongside the circuit.
    #[arg(long)]
    x: Option<String>,
    /// Label length.
    #[arg(long)]
    kappa: Option<usize>,
    /// sha256, or feistel:R for an R-round Feistel cipher.
    #[arg(long)]
    suite: Option<String>,
    /// Write the package here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Instead of garbling, decode this package (it must carry input labels).
    #[arg(long)]
    open: Option<PathBuf>,
}

fn parse_suite(s: &str) -> Result<Suite> {
    if s == "sha256" {
        return Ok(Suite::Sha256);
    }
    match s.strip_prefix("feistel:").and_then(|r| r.parse().ok()) {
        Some(rounds) => Ok(Suite::Feistel { rounds }),
        None if s == "feistel" => Ok(Suite::feistel()),
        None => bail!("unknown suite {s}; use sha256 or feistel:R"),
    }
}

pub fn garble(ctx: &Ctx, a: &GarbleArgs) -> Result<Vec<String>> {
    let cfg = &ctx.cfg;
    let c = load_circuit(&cfg.require(a.circuit.clone(), "circuit")?)?;
    let suite = parse_suite(&cfg.get(a.suite.clone(), "suite", "sha256".to_string())?)?;

    if let Some(path) = cfg.opt(a.open.clone(), "open")? {
        let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let pkg = GarbledPackage::from_bytes(&bytes)?;
        if pkg.suite_tag != suite.tag() {
            bail!("package was garbled with another suite (tag {})", pkg.suite_tag);
        }
        let ie = pkg.ie.as_ref().ok_or_else(|| anyhow!("package carries no input labels"))?;
        let y = Garbler::new(pkg.ce.kappa, suite).degarble(&c, &pkg.ce, ie)?;
        let line = json!({"command": "garble", "mode": "open", "y": y.to_string()});
        return Ok(vec![line.to_string()]);
    }

    let g = Garbler::new(cfg.get(a.kappa, "kappa", 16)?, suite);
    let mut rng = seed::rng(&seed::derive(&ctx.seed, &["garble"]));
    let r = Bits::random(&mut rng, g.r_len(&c));
    let r_gcin = Bits::random(&mut rng, g.r_gcin_len(&c));
    let ce = g.garble_circuit(&c, &r, &r_gcin)?;
    let (ie, y) = match cfg.opt(a.x.clone(), "x")? {
        Some(s) => {
            let x = parse_input(&s, c.n_inputs())?;
            let ie = g.garble_input(&x, &r)?;
            let y = g.degarble(&c, &ce, &ie)?;
            (Some(ie), Some(y))
        }
        None => (None, None),
    };
    let pkg = GarbledPackage::new(suite.tag(), &c, ce, ie).to_bytes();
    if let Some(path) = cfg.opt(a.out.clone(), "out")? {
        std::fs::write(&path, &pkg).with_context(|| format!("writing {}", path.display()))?;
    }
    let line = json!({
        "command": "garble",
        "mode": "garble",
        "n": c.n_inputs(),
        "gates": c.gates().len(),
        "kappa": g.kappa,
        "encoding_bits": g.encoding_len(&c),
        "package_bytes": pkg.len(),
        "y": y.map(|y| y.to_string()),
    });
    Ok(vec![line.to_string()])
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Transcript file (JSON lines) written by a session command.
    input: PathBuf,
    /// step or direction.
    #[arg(long = "by")]
    by: Option<String>,
}

pub fn report(ctx: &Ctx, a: &ReportArgs) -> Result<Vec<String>> {
    let by = match ctx.cfg.get(a.by.clone(), "by", "step".to_string())?.as_str() {
        "step" => GroupBy::Step,
        "direction" => GroupBy::Direction,
        other => bail!("unknown grouping {other}; use step or direction"),
    };
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let t = Transcript::from_jsonl(&text)?;
    let mut lines = t.report(by).iter().map(serde_json::to_string).collect::<Result<Vec<_>, _>>()?;
    lines.push(serde_json::to_string(&ReportRow {
        key: "total".into(),
        frames: t.entries.len(),
        client_to_server: t.total(Direction::ClientToServer),
        server_to_client: t.total(Direction::ServerToClient),
    })?);
    Ok(lines)
}
