//! Value preparation with client-side soundness. After the value is
//! prepared, the server publishes a hash `c = h(y)`, and the client argues
//! `L` times that it knows `(x, r)` with `h(f(x)) = c` and
//! `Commit(x, r, pp) = com`.

use std::sync::Arc;

use rand::RngCore;
use sfslab_core::circuits::{BoolFunction, Circuit};
use sfslab_core::primitives::{commit, verify_opening, CommitParams, Commitment, HashFn};
use sfslab_core::seed::{self, Seed};
use sfslab_core::Bits;

use super::{sfvp_client, sfvp_server, SfvpClientOutcome, SfvpParams, SfvpServerOutcome};
use crate::runtime::{
    is_abort, run_session, Channel, Endpoint, ProtocolError, Tag, Transcript, WireReader, WireWriter,
};
use crate::sfs::{hash_len, party_seeds, ServerStrategy};
use crate::succ_test::{aok_challenge, aok_verify, AokProver, WitnessOracle};

/// `poly_AoK(δ) = slope·δ` for the argument backends.
pub const DEFAULT_AOK_SLOPE: f64 = 4.0;

const CTRL_ACCEPT: u8 = 4;

/// `L = 16 / (ε² · poly⁻¹(ε/4))` with `poly(δ) = slope·δ`, i.e. `64·slope/ε³`.
pub fn aok_rounds(eps: f64, slope: f64) -> f64 {
    16.0 / (eps * eps * (eps / 4.0 / slope))
}

/// Public part of the set-up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sfvp2Public {
    pub commit: CommitParams,
    pub pp: Bits,
    pub com: Commitment,
}

/// The client's input with its opening.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sfvp2Setup {
    pub x: Bits,
    pub r: Bits,
    pub public: Sfvp2Public,
}

impl Sfvp2Setup {
    /// Commits to `x` with fresh randomness and public string.
    pub fn new<R: RngCore + ?Sized>(x: Bits, kappa: usize, rng: &mut R) -> Result<Self, ProtocolError> {
        let params = CommitParams::new(x.len(), kappa);
        let pp = params.sample_pp(rng);
        let r = params.sample_r(rng);
        let com = commit(&params, &x, &r, &pp)?;
        Ok(Self { x, r, public: Sfvp2Public { commit: params, pp, com } })
    }

    pub fn from_parts(x: Bits, r: Bits, public: Sfvp2Public) -> Result<Self, ProtocolError> {
        let s = Self { x, r, public };
        s.check()?;
        Ok(s)
    }

    /// `com = Commit(x, r, pp)`.
    pub fn check(&self) -> Result<(), ProtocolError> {
        let p = &self.public;
        if !verify_opening(&p.commit, &p.com, &self.x, &self.r, &p.pp)? {
            return Err(ProtocolError::Config("commitment does not open to the input".into()));
        }
        Ok(())
    }

    fn witness(&self) -> Bits {
        Bits::concat([&self.x, &self.r])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sfvp2Params {
    pub sfvp: SfvpParams,
    /// Overrides the number of argument rounds.
    pub aok_cap: Option<usize>,
    pub aok_slope: f64,
}

impl Sfvp2Params {
    pub fn new(sfvp: SfvpParams) -> Self {
        Self { sfvp, aok_cap: None, aok_slope: DEFAULT_AOK_SLOPE }
    }

    pub fn with_aok_cap(mut self, cap: usize) -> Self {
        self.aok_cap = Some(cap);
        self
    }

    /// Number of argument rounds, after the cap.
    pub fn rounds(&self) -> Result<usize, ProtocolError> {
        let eps = self.sfvp.sfs.eps;
        if !(eps > 0.0 && eps <= 1.0) || self.aok_slope <= 0.0 {
            return Err(ProtocolError::Config(format!("need 0 < ε ≤ 1 and a positive slope (ε={eps})")));
        }
        let l = aok_rounds(eps, self.aok_slope).ceil() as usize;
        Ok(match self.aok_cap {
            Some(0) => return Err(ProtocolError::Config("argument round cap must be positive".into())),
            Some(c) => {
                log::info!("argument rounds overridden: formula gives {l}, running {c}");
                c
            }
            None => l,
        })
    }
}

/// Client decision points.
pub trait ClientStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Input fed to the value preparation step.
    fn sfvp_input(&self, x: &Bits, _f: &dyn BoolFunction) -> Bits {
        x.clone()
    }

    /// Witness for each argument round.
    fn aok_witness(&self, honest: &Bits) -> Bits {
        honest.clone()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HonestClient;

impl ClientStrategy for HonestClient {
    fn name(&self) -> &str {
        "honest"
    }
}

/// Prepares the value for some `x'` with `f(x') ≠ f(x)` while arguing
/// about the committed `x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InputSwap;

/// Inputs above this width are not searched exhaustively.
const SWAP_SEARCH_BITS: usize = 16;

impl ClientStrategy for InputSwap {
    fn name(&self) -> &str {
        "input-swap"
    }

    fn sfvp_input(&self, x: &Bits, f: &dyn BoolFunction) -> Bits {
        let y = f.eval_unchecked(x);
        let flips = (0..x.len()).map(|i| {
            let mut c = x.clone();
            c.set(i, !c.get(i));
            c
        });
        let all = (0..1u64 << x.len().min(SWAP_SEARCH_BITS)).map(|v| {
            let mut c = x.clone();
            c.write_at(0, &Bits::from_u64(v, x.len().min(SWAP_SEARCH_BITS)));
            c
        });
        flips.chain(all).find(|c| f.eval_unchecked(c) != y).unwrap_or_else(|| {
            log::warn!("no input changes the output; swapping bit 0 anyway");
            let mut c = x.clone();
            c.set(0, !c.get(0));
            c
        })
    }
}

pub const CLIENT_ADVERSARIES: &[&str] = &["honest", "input-swap"];

pub fn client_adversary(name: &str) -> Result<Arc<dyn ClientStrategy>, ProtocolError> {
    Ok(match name {
        "honest" => Arc::new(HonestClient),
        "input-swap" => Arc::new(InputSwap),
        _ => return Err(ProtocolError::UnknownAdversary(name.to_string())),
    })
}

#[derive(Debug, Clone)]
pub struct Sfvp2ClientOutcome {
    /// The value preparation step passed the client's checks.
    pub flag: bool,
    /// The server accepted every argument round.
    pub server_accepted: bool,
    pub sfvp: SfvpClientOutcome,
}

#[derive(Debug, Clone)]
pub struct Sfvp2ServerOutcome {
    pub flag: bool,
    pub y: Option<Bits>,
    /// Argument rounds verified before the outcome was decided.
    pub rounds_passed: usize,
    pub sfvp: SfvpServerOutcome,
}

fn statement_holds(f: &Circuit, public: &Sfvp2Public, h: &HashFn, c: &Bits, w: &Bits) -> bool {
    let n = f.n_inputs();
    if w.len() != n + public.commit.r_len() {
        return false;
    }
    let (x, r) = (w.slice(0..n), w.slice(n..w.len()));
    let hashed = h.eval(&f.eval_unchecked(&x));
    hashed.as_ref() == Ok(c) && verify_opening(&public.commit, &public.com, &x, &r, &public.pp).unwrap_or(false)
}

#[allow(clippy::too_many_arguments)]
pub fn sfvp2_client(
    ep: &mut Endpoint,
    params: &Sfvp2Params,
    f: &Circuit,
    setup: &Sfvp2Setup,
    strategy: &dyn ClientStrategy,
    oracle: Option<&WitnessOracle>,
    seed: &Seed,
) -> Result<Sfvp2ClientOutcome, ProtocolError> {
    setup.check()?;
    let rounds = params.rounds()?;
    let x_used = strategy.sfvp_input(&setup.x, f);
    let sfvp = sfvp_client(ep, &params.sfvp, f, &x_used, oracle, seed)?;
    if !sfvp.flag {
        return Ok(Sfvp2ClientOutcome { flag: false, server_accepted: false, sfvp });
    }
    let msg = ep.recv_tag("sfvp2.hash", Tag::Classical)?;
    let mut rd = WireReader::new(&msg);
    HashFn::from_bytes(rd.bytes()?).ok_or_else(|| ProtocolError::Decode("hash description".into()))?;
    rd.bits()?;
    rd.finish()?;

    let w = strategy.aok_witness(&setup.witness());
    let mut accepted = true;
    for _ in 0..rounds {
        let prover = AokProver::new(params.sfvp.sfs.backend, w.clone(), oracle);
        ep.send("sfvp2.aok-commit", Tag::Classical, prover.first_message())?;
        let e = ep.recv_tag("sfvp2.aok-challenge", Tag::Classical)?;
        ep.send("sfvp2.aok-response", Tag::Classical, prover.respond(&e)?)?;
        let v = ep.recv()?;
        if is_abort(&v) {
            accepted = false;
            break;
        }
        if v.tag != Tag::Control || v.payload != [CTRL_ACCEPT] {
            return Err(ProtocolError::Decode("bad argument verdict".into()));
        }
    }
    Ok(Sfvp2ClientOutcome { flag: true, server_accepted: accepted, sfvp })
}

pub fn sfvp2_server(
    ep: &mut Endpoint,
    params: &Sfvp2Params,
    f: &Circuit,
    public: &Sfvp2Public,
    strategy: &dyn ServerStrategy,
    oracle: Option<&WitnessOracle>,
    seed: &Seed,
) -> Result<Sfvp2ServerOutcome, ProtocolError> {
    let rounds = params.rounds()?;
    let sfvp = sfvp_server(ep, &params.sfvp, f, strategy, oracle, seed)?;
    let Some(y) = sfvp.y.clone().filter(|_| sfvp.flag) else {
        return Ok(Sfvp2ServerOutcome { flag: false, y: None, rounds_passed: 0, sfvp });
    };
    let mut rng = seed::rng(&seed::derive(seed, &["aok"]));
    let h = HashFn::sample(&mut rng, y.len(), hash_len(params.sfvp.sfs.kappa));
    let c = h.eval(&y)?;
    ep.send("sfvp2.hash", Tag::Classical, WireWriter::new().bytes(&h.to_bytes()).bits(&c).finish())?;

    let backend = params.sfvp.sfs.backend;
    let w_len = f.n_inputs() + public.commit.r_len();
    let pred = |w: &Bits| statement_holds(f, public, &h, &c, w);
    for i in 0..rounds {
        let a = ep.recv_tag("sfvp2.aok-commit", Tag::Classical)?;
        let e = aok_challenge(backend, w_len, &mut rng);
        ep.send("sfvp2.aok-challenge", Tag::Classical, e.clone())?;
        let z = ep.recv_tag("sfvp2.aok-response", Tag::Classical)?;
        if !aok_verify(backend, w_len, &a, &e, &z, oracle, &pred)? {
            ep.send_abort("sfvp2.abort")?;
            return Ok(Sfvp2ServerOutcome { flag: false, y: None, rounds_passed: i, sfvp });
        }
        ep.send("sfvp2.accept", Tag::Control, vec![CTRL_ACCEPT])?;
    }
    Ok(Sfvp2ServerOutcome { flag: true, y: Some(y), rounds_passed: rounds, sfvp })
}

#[derive(Debug)]
pub struct Sfvp2Run {
    pub client: Sfvp2ClientOutcome,
    pub server: Sfvp2ServerOutcome,
    pub transcript: Transcript,
}

pub fn run_sfvp2(
    channel: &Channel,
    params: &Sfvp2Params,
    f: &Circuit,
    setup: &Sfvp2Setup,
    client: Arc<dyn ClientStrategy>,
    server: Arc<dyn ServerStrategy>,
    seed: &Seed,
) -> Result<Sfvp2Run, ProtocolError> {
    params.sfvp.sfs_for(f)?.plan()?;
    params.rounds()?;
    let (cs, ss) = party_seeds(seed);
    let oracle = params.sfvp.sfs.backend.needs_oracle().then(WitnessOracle::grant);
    let public = setup.public.clone();
    let r = run_session(
        channel,
        |ep| sfvp2_client(ep, params, f, setup, client.as_ref(), oracle.as_ref(), &seed::derive(&cs, &["sfvp2"])),
        |ep| sfvp2_server(ep, params, f, &public, server.as_ref(), oracle.as_ref(), &seed::derive(&ss, &["sfvp2"])),
    )?;
    Ok(Sfvp2Run { client: r.client?, server: r.server?, transcript: r.transcript })
}
