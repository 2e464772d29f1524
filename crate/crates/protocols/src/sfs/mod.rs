//! Secure function sampling: the client ends with a random `x`, the server
//! with `f(x)`, and the communication does not grow with `|f(x)|`.
//!
//! A round sends the two-branch state
//! `(|0, x0, r0_in, r0_out⟩ + |1, x1, r1_in, r1_out⟩)/√2`; the server evaluates
//! `f` and Hadamard-measures the input registers. Test rounds then certify
//! the remaining state through a succinct witness test in the computational
//! or the Hadamard basis; computation rounds collapse it so the output padding
//! tells the client which `x_b` the server's `f(x_b)` belongs to. The
//! amplifier interleaves both kinds and keeps one computation round.
//!
//! Quantum messages travel as serialized sparse states in frames tagged
//! `state`, which models an ideal quantum channel.

mod randomized;
mod round;
mod strategy;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use sfslab_core::circuits::BoolFunction;
use sfslab_core::seed::{self, Seed};
use sfslab_core::Bits;

use crate::runtime::{run_session, Channel, ProtocolError, Transcript};
use crate::succ_test::{AokBackend, WitnessOracle};

pub use randomized::{run_sfs_randomized, CoinFn, RandomizedOutcome, SeededFn};
pub use round::{
    client_comp_check, client_step1_prepare, client_step2_check, comp_test_relation, hadamard_parity,
    hadamard_test_relation, hash_len, sfs_client, sfs_server, state_layout, ClientSecrets, RoundFailure, RoundRecord,
    ServerOutcome, SfsOutcome,
};
pub use strategy::{honest_step2, Honest, ServerStrategy, Step2, WitnessContext};

pub const REG_SUB: &str = "sub";
pub const REG_IN: &str = "in";
pub const REG_INPAD: &str = "inpad";
pub const REG_OUTPAD: &str = "outpad";
pub const REG_OUT: &str = "out";

/// Uncapped plans above this many rounds are refused.
pub const MAX_UNCAPPED_ROUNDS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    Computational,
    Hadamard,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Computational => "computational",
            TestKind::Hadamard => "hadamard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Test(TestKind),
    Comp,
}

impl Mode {
    fn wire(self) -> u8 {
        match self {
            Mode::Comp => 0,
            Mode::Test(TestKind::Computational) => 1,
            Mode::Test(TestKind::Hadamard) => 2,
        }
    }

    fn from_wire(b: u8) -> Option<Self> {
        match b {
            0 => Some(Mode::Comp),
            1 => Some(Mode::Test(TestKind::Computational)),
            2 => Some(Mode::Test(TestKind::Hadamard)),
            _ => None,
        }
    }
}

/// Which rounds the client runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// One test-mode round.
    Test,
    /// One computation-mode round.
    Comp,
    /// Single amplification layer: `L` rounds, each a test with probability `p`.
    Temp,
    /// `L` outer repetitions of the single layer at tolerance `(ε+ε0)/2`.
    Full,
    /// `tests` test rounds followed by one computation round.
    Schedule { tests: usize },
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Test => f.write_str("test"),
            Stage::Comp => f.write_str("comp"),
            Stage::Temp => f.write_str("temp"),
            Stage::Full => f.write_str("full"),
            Stage::Schedule { tests } => write!(f, "schedule:{tests}"),
        }
    }
}

impl Stage {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "test" => Some(Stage::Test),
            "comp" => Some(Stage::Comp),
            "temp" => Some(Stage::Temp),
            "full" => Some(Stage::Full),
            _ => s.strip_prefix("schedule:").and_then(|t| t.parse().ok()).map(|tests| Stage::Schedule { tests }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfsParams {
    pub n: usize,
    pub m: usize,
    pub kappa: usize,
    pub eps: f64,
    pub eps0: f64,
    pub delta: f64,
    /// Replaces the round count `L` of each amplification layer.
    pub rounds_cap: Option<usize>,
    pub backend: AokBackend,
    pub stage: Stage,
    /// Fixes the test kind of test rounds instead of a fair coin.
    pub force_test: Option<TestKind>,
}

/// Default `ε0 = δ^{1/4}`; a heuristic, since the soundness polynomial of the
/// single round is unspecified.
pub fn default_eps0(delta: f64) -> f64 {
    delta.powf(0.25)
}

/// Round count of one amplification layer, `512 / (δ (ε-ε0)^3)`.
pub fn temp_rounds(eps: f64, eps0: f64, delta: f64) -> f64 {
    512.0 / (delta * (eps - eps0).powi(3))
}

/// Test probability of one amplification layer, `(ε-ε0)/8`.
pub fn test_probability(eps: f64, eps0: f64) -> f64 {
    (eps - eps0) / 8.0
}

/// Outer repetitions of the full amplifier, `1728 / (ε-ε0)^3`.
pub fn full_rounds(eps: f64, eps0: f64) -> f64 {
    1728.0 / (eps - eps0).powi(3)
}

/// Resolved round counts for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundPlan {
    pub outer: usize,
    pub inner: usize,
    /// Test probability inside a layer.
    pub p: f64,
    pub capped: bool,
}

impl RoundPlan {
    pub fn max_rounds(&self) -> usize {
        self.outer * (self.inner + 1)
    }
}

impl SfsParams {
    pub fn new(n: usize, m: usize, kappa: usize) -> Self {
        let delta = 0.1;
        Self {
            n,
            m,
            kappa,
            eps: 0.95,
            eps0: default_eps0(delta),
            delta,
            rounds_cap: None,
            backend: AokBackend::Reveal,
            stage: Stage::Full,
            force_test: None,
        }
    }

    pub fn for_fn(f: &dyn BoolFunction, kappa: usize) -> Self {
        Self::new(f.n_inputs(), f.n_outputs(), kappa)
    }

    pub fn with_stage(mut self, stage: Stage) -> Self {
        self.stage = stage;
        self
    }

    pub fn with_backend(mut self, backend: AokBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.rounds_cap = Some(cap);
        self
    }

    pub fn validate(&self, f: &dyn BoolFunction) -> Result<(), ProtocolError> {
        if f.n_inputs() != self.n || f.n_outputs() != self.m {
            return Err(ProtocolError::Config(format!(
                "function is {}→{} but parameters say {}→{}",
                f.n_inputs(),
                f.n_outputs(),
                self.n,
                self.m
            )));
        }
        if self.kappa == 0 {
            return Err(ProtocolError::Config("padding length must be positive".into()));
        }
        if self.rounds_cap == Some(0) {
            return Err(ProtocolError::Config("rounds cap must be positive".into()));
        }
        Ok(())
    }

    fn layer(&self, eps: f64) -> Result<(usize, f64), ProtocolError> {
        if !(eps > self.eps0 && eps <= 1.0 && self.delta > 0.0 && self.delta < 1.0) {
            return Err(ProtocolError::Config(format!(
                "amplification needs 0 < δ < 1 and ε0 < ε ≤ 1 (ε={}, ε0={}, δ={})",
                eps, self.eps0, self.delta
            )));
        }
        Ok((temp_rounds(eps, self.eps0, self.delta).ceil() as usize, test_probability(eps, self.eps0)))
    }

    /// Round counts after applying the cap, logging any override.
    pub fn plan(&self) -> Result<RoundPlan, ProtocolError> {
        let cap = |what: &str, l: usize| match self.rounds_cap {
            Some(c) => {
                log::info!("{what} rounds overridden: formula gives {l}, running {c}");
                c
            }
            None => l,
        };
        let plan = match self.stage {
            Stage::Test | Stage::Comp => {
                RoundPlan { outer: 1, inner: 1, p: if self.stage == Stage::Test { 1.0 } else { 0.0 }, capped: false }
            }
            Stage::Schedule { tests } => RoundPlan { outer: 1, inner: tests + 1, p: 1.0, capped: true },
            Stage::Temp => {
                let (l, p) = self.layer(self.eps)?;
                RoundPlan { outer: 1, inner: cap("layer", l), p, capped: self.rounds_cap.is_some() }
            }
            Stage::Full => {
                self.layer(self.eps)?;
                let (l, p) = self.layer((self.eps + self.eps0) / 2.0)?;
                let outer = full_rounds(self.eps, self.eps0).ceil() as usize;
                RoundPlan { outer: cap("outer", outer), inner: cap("layer", l), p, capped: self.rounds_cap.is_some() }
            }
        };
        if !plan.capped && plan.max_rounds() > MAX_UNCAPPED_ROUNDS {
            return Err(ProtocolError::Config(format!(
                "plan needs up to {} rounds; set a rounds cap",
                plan.max_rounds()
            )));
        }
        Ok(plan)
    }
}

/// Both parties' view of one SFS session.
#[derive(Debug)]
pub struct SfsRun {
    pub client: SfsOutcome,
    pub server: ServerOutcome,
    pub transcript: Transcript,
}

/// Seeds for the two parties of a session.
pub fn party_seeds(seed: &Seed) -> (Seed, Seed) {
    (seed::derive(seed, &["client"]), seed::derive(seed, &["server"]))
}

/// Runs a full session between the honest client and `strategy`.
pub fn run_sfs(
    channel: &Channel,
    params: &SfsParams,
    f: Arc<dyn BoolFunction>,
    strategy: Arc<dyn ServerStrategy>,
    seed: &Seed,
) -> Result<SfsRun, ProtocolError> {
    params.validate(f.as_ref())?;
    params.plan()?;
    let (cs, ss) = party_seeds(seed);
    let oracle = params.backend.needs_oracle().then(WitnessOracle::grant);
    let (fc, fs) = (f.clone(), f);
    let (oc, os) = (oracle.clone(), oracle);
    let r = run_session(
        channel,
        |ep| sfs_client(ep, params, &fc, oc.as_ref(), &cs),
        |ep| sfs_server(ep, params, fs.as_ref(), strategy.as_ref(), os.as_ref(), &ss),
    )?;
    Ok(SfsRun { client: r.client?, server: r.server?, transcript: r.transcript })
}

/// One test-mode round.
pub fn run_sfs_test_mode(
    params: &SfsParams,
    f: Arc<dyn BoolFunction>,
    strategy: Arc<dyn ServerStrategy>,
    seed: &Seed,
) -> Result<SfsRun, ProtocolError> {
    run_sfs(&Channel::InProcess, &params.clone().with_stage(Stage::Test), f, strategy, seed)
}

/// One computation-mode round.
pub fn run_sfs_comp_mode(
    params: &SfsParams,
    f: Arc<dyn BoolFunction>,
    strategy: Arc<dyn ServerStrategy>,
    seed: &Seed,
) -> Result<SfsRun, ProtocolError> {
    run_sfs(&Channel::InProcess, &params.clone().with_stage(Stage::Comp), f, strategy, seed)
}

/// Amplified run at the given layer depth (`Stage::Temp` or `Stage::Full`).
pub fn amplify(
    params: &SfsParams,
    f: Arc<dyn BoolFunction>,
    strategy: Arc<dyn ServerStrategy>,
    seed: &Seed,
    stage: Stage,
) -> Result<SfsRun, ProtocolError> {
    if !matches!(stage, Stage::Temp | Stage::Full) {
        return Err(ProtocolError::Config(format!("{stage} is not an amplification stage")));
    }
    run_sfs(&Channel::InProcess, &params.clone().with_stage(stage), f, strategy, seed)
}

fn pick_test_kind<R: Rng + ?Sized>(forced: Option<TestKind>, rng: &mut R) -> TestKind {
    forced.unwrap_or_else(|| if rng.gen_bool(0.5) { TestKind::Computational } else { TestKind::Hadamard })
}

/// Concatenation helper shared by the relation encoders.
fn cat(parts: &[&Bits]) -> Bits {
    Bits::concat(parts.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_formulas() {
        assert_eq!(temp_rounds(0.9, 0.4, 0.5), 8192.0);
        assert_eq!(test_probability(0.9, 0.4), 0.0625);
        assert_eq!(full_rounds(0.9, 0.4), 13824.0);
    }

    #[test]
    fn plans_respect_cap_and_limit() {
        let mut p = SfsParams::new(4, 4, 8);
        assert!(matches!(p.plan(), Err(ProtocolError::Config(_))));
        p.rounds_cap = Some(3);
        let plan = p.plan().unwrap();
        assert_eq!((plan.outer, plan.inner), (3, 3));
        p.stage = Stage::Temp;
        p.rounds_cap = None;
        p.eps = 0.9;
        p.eps0 = 0.4;
        p.delta = 0.5;
        assert_eq!(p.plan().unwrap().inner, 8192);
        p.eps0 = 0.95;
        assert!(p.plan().is_err());
    }

    #[test]
    fn stage_names_roundtrip() {
        for s in [Stage::Test, Stage::Comp, Stage::Temp, Stage::Full, Stage::Schedule { tests: 8 }] {
            assert_eq!(Stage::parse(&s.to_string()), Some(s));
        }
    }
}
