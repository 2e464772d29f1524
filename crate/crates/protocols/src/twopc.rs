//! Two-party computation with output-independent communication.
//!
//! Step 1 hands out commitment material, garbling coins and input encodings
//! through a pluggable sub-protocol; the in-process ideal dealer computes
//! every value honestly and gives each one only to its owner. In step 2 Bob
//! sends Alice the circuit encoding `g_A(r_A, s_A) = GarbleC(C_fA, r_A; PRG(s_A))`
//! through SFVP2, and Alice evaluates it on her input labels. Step 3 is the
//! same with the roles swapped. Input encodings therefore reach their
//! holders before any circuit encoding is sent.
//!
//! One session carries both steps. Bob speaks first, so he is the session's
//! client; in step 3 Alice plays the SFVP2 client over the server endpoint.

use std::sync::Arc;

use rand::RngCore;
use sfslab_core::circuits::Circuit;
use sfslab_core::garbling::{Garbler, InputEncoding, Suite};
use sfslab_core::primitives::{commit, CommitParams};
use sfslab_core::seed::{self, Seed};
use sfslab_core::Bits;

use crate::runtime::{run_session, Channel, Endpoint, ProtocolError, Tag, Transcript};
use crate::sfs::{Honest, ServerStrategy};
use crate::sfvp::{
    sfvp2_client, sfvp2_server, ClientStrategy, HonestClient, Sfvp2Params, Sfvp2Public, Sfvp2Setup, SfvpParams,
};
use crate::succ_test::WitnessOracle;

pub const DEFAULT_GARBLE_KAPPA: usize = 8;
pub const DEFAULT_FEISTEL_ROUNDS: usize = 8;
pub const DEFAULT_SFS_KAPPA: usize = 16;

const CTRL_STEP3: u8 = 5;

/// How step 1 is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step1Backend {
    /// Trusted in-process computation of every step-1 output.
    IdealDealer,
    /// Slot for a real sub-protocol; none is linked in.
    External,
}

impl Step1Backend {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ideal-dealer" => Some(Self::IdealDealer),
            "external" => Some(Self::External),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwopcParams {
    pub n_a: usize,
    pub n_b: usize,
    /// Overall tolerance; each direction runs at `eps/2`.
    pub eps: f64,
    /// Garbler for the two functions. Its suite must compile to a circuit.
    pub garbler: Garbler,
    /// Template for both SFVP2 runs; its tolerance is overwritten.
    pub sfvp2: Sfvp2Params,
    pub backend: Step1Backend,
}

impl TwopcParams {
    pub fn new(n_a: usize, n_b: usize) -> Self {
        Self {
            n_a,
            n_b,
            eps: 0.95,
            garbler: Garbler::new(DEFAULT_GARBLE_KAPPA, Suite::Feistel { rounds: DEFAULT_FEISTEL_ROUNDS }),
            sfvp2: Sfvp2Params::new(SfvpParams::new(DEFAULT_SFS_KAPPA)),
            backend: Step1Backend::IdealDealer,
        }
    }

    pub fn n(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn kappa(&self) -> usize {
        self.garbler.kappa
    }

    /// Commitments cover `r ‖ s`, which is `(n_A+n_B+1)·κ` bits.
    pub fn commit_params(&self) -> CommitParams {
        CommitParams::new((self.n() + 1) * self.kappa(), self.kappa())
    }

    fn direction_params(&self) -> Sfvp2Params {
        let mut p = self.sfvp2.clone();
        p.sfvp.sfs.eps = self.eps / 2.0;
        p
    }

    /// The circuit `(r ‖ s) ↦ GarbleC(C, r; PRG(s))` sent in one direction.
    pub fn encoder_circuit(&self, c: &Circuit) -> Result<Circuit, ProtocolError> {
        if c.n_inputs() != self.n() {
            return Err(ProtocolError::Config(format!(
                "function takes {} inputs, parties hold {}",
                c.n_inputs(),
                self.n()
            )));
        }
        Ok(self.garbler.compile_seeded_garbler(c, self.kappa())?)
    }
}

/// Material for one direction: garbling coins, their commitment, and the
/// input labels for `x_A ‖ x_B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionMaterial {
    pub pp: Bits,
    pub r_com: Bits,
    pub r: Bits,
    pub s: Bits,
    pub com: sfslab_core::primitives::Commitment,
    pub ie: InputEncoding,
}

impl DirectionMaterial {
    fn public(&self, commit: CommitParams) -> Sfvp2Public {
        Sfvp2Public { commit, pp: self.pp.clone(), com: self.com.clone() }
    }
}

/// Everything step 1 produces. Superscript `A` marks values used to
/// evaluate `f_A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step1Outputs {
    pub commit: CommitParams,
    pub a: DirectionMaterial,
    pub b: DirectionMaterial,
}

/// Who receives a step-1 value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Alice,
    Bob,
    Public,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub owner: Owner,
    pub item: &'static str,
    pub bits: usize,
}

impl Step1Outputs {
    /// Deliveries in the order the dealer makes them.
    pub fn deliveries(&self) -> Vec<Delivery> {
        let d = |owner, item, bits| Delivery { owner, item, bits };
        let (a, b) = (&self.a, &self.b);
        vec![
            d(Owner::Public, "pp_A", a.pp.len()),
            d(Owner::Public, "pp_B", b.pp.len()),
            d(Owner::Bob, "r_com_A", a.r_com.len()),
            d(Owner::Alice, "r_com_B", b.r_com.len()),
            d(Owner::Bob, "r_A", a.r.len()),
            d(Owner::Bob, "s_A", a.s.len()),
            d(Owner::Alice, "r_B", b.r.len()),
            d(Owner::Alice, "s_B", b.s.len()),
            d(Owner::Public, "com_A", a.com.0.len()),
            d(Owner::Public, "com_B", b.com.0.len()),
            d(Owner::Alice, "ie_A", a.ie.to_flat().len()),
            d(Owner::Bob, "ie_B", b.ie.to_flat().len()),
        ]
    }

    pub fn total_bits(&self) -> usize {
        self.deliveries().iter().map(|d| d.bits).sum()
    }

    /// Alice's share: her step-3 opening and step-2 input labels.
    pub fn alice_view(&self) -> Result<PartyView, ProtocolError> {
        self.view(&self.b, &self.a)
    }

    /// Bob's share: his step-2 opening and step-3 input labels.
    pub fn bob_view(&self) -> Result<PartyView, ProtocolError> {
        self.view(&self.a, &self.b)
    }

    fn view(&self, sends: &DirectionMaterial, receives: &DirectionMaterial) -> Result<PartyView, ProtocolError> {
        Ok(PartyView {
            setup: Sfvp2Setup::from_parts(
                Bits::concat([&sends.r, &sends.s]),
                sends.r_com.clone(),
                sends.public(self.commit),
            )?,
            receive_public: receives.public(self.commit),
            ie: receives.ie.clone(),
        })
    }
}

/// What one party holds after step 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyView {
    /// Opening for the direction this party sends.
    pub setup: Sfvp2Setup,
    /// Public commitment for the direction this party receives.
    pub receive_public: Sfvp2Public,
    /// Input labels for the circuit this party receives.
    pub ie: InputEncoding,
}

fn direction<R: RngCore + ?Sized>(
    params: &TwopcParams,
    commit_params: &CommitParams,
    x: &Bits,
    rng: &mut R,
) -> Result<DirectionMaterial, ProtocolError> {
    let k = params.kappa();
    let pp = commit_params.sample_pp(rng);
    let r_com = commit_params.sample_r(rng);
    let r = Bits::random(rng, params.n() * k);
    let s = Bits::random(rng, k);
    let com = commit(commit_params, &Bits::concat([&r, &s]), &r_com, &pp)?;
    let ie = params.garbler.garble_input(x, &r)?;
    Ok(DirectionMaterial { pp, r_com, r, s, com, ie })
}

/// Step 1 through the configured backend.
pub fn dealer_step1<R: RngCore + ?Sized>(
    x_a: &Bits,
    x_b: &Bits,
    params: &TwopcParams,
    rng: &mut R,
) -> Result<Step1Outputs, ProtocolError> {
    if params.backend != Step1Backend::IdealDealer {
        return Err(ProtocolError::Config("no external step-1 backend is available".into()));
    }
    if x_a.len() != params.n_a || x_b.len() != params.n_b {
        return Err(ProtocolError::Config(format!(
            "inputs are {}+{} bits, parameters say {}+{}",
            x_a.len(),
            x_b.len(),
            params.n_a,
            params.n_b
        )));
    }
    let x = Bits::concat([x_a, x_b]);
    let commit = params.commit_params();
    let a = direction(params, &commit, &x, rng)?;
    let b = direction(params, &commit, &x, rng)?;
    Ok(Step1Outputs { commit, a, b })
}

/// A party's behavior in both of its SFVP2 roles.
#[derive(Clone)]
pub struct PartyImpl {
    pub as_client: Arc<dyn ClientStrategy>,
    pub as_server: Arc<dyn ServerStrategy>,
}

impl PartyImpl {
    pub fn honest() -> Self {
        Self { as_client: Arc::new(HonestClient), as_server: Arc::new(Honest) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyOutcome {
    pub flag: bool,
    pub y: Option<Bits>,
    /// Whether this party's incoming direction completed.
    pub received: bool,
}

#[derive(Debug)]
pub struct TwopcRun {
    pub alice: PartyOutcome,
    pub bob: PartyOutcome,
    pub step1: Step1Outputs,
    pub transcript: Transcript,
}

struct Side<'a> {
    params: &'a Sfvp2Params,
    view: PartyView,
    /// Circuit this party sends.
    send: &'a Circuit,
    /// Circuit this party receives and the function behind it.
    recv: &'a Circuit,
    f_recv: &'a Circuit,
    garbler: &'a Garbler,
    imp: &'a PartyImpl,
    oracle: Option<&'a WitnessOracle>,
    seed: Seed,
}

impl Side<'_> {
    /// Receives the circuit encoding and evaluates it on the held labels.
    fn receive(&self, ep: &mut Endpoint) -> Result<Option<Bits>, ProtocolError> {
        let out = sfvp2_server(
            ep,
            self.params,
            self.recv,
            &self.view.receive_public,
            self.imp.as_server.as_ref(),
            self.oracle,
            &seed::derive(&self.seed, &["receive"]),
        )?;
        let Some(enc) = out.y.filter(|_| out.flag) else {
            return Ok(None);
        };
        let ce = self.garbler.encoding_from_flat(self.f_recv, enc)?;
        Ok(Some(self.garbler.degarble(self.f_recv, &ce, &self.view.ie)?))
    }

    /// Sends this party's circuit encoding; true when both sides accepted.
    fn send(&self, ep: &mut Endpoint) -> Result<bool, ProtocolError> {
        let out = sfvp2_client(
            ep,
            self.params,
            self.send,
            &self.view.setup,
            self.imp.as_client.as_ref(),
            self.oracle,
            &seed::derive(&self.seed, &["send"]),
        )?;
        Ok(out.flag && out.server_accepted)
    }
}

fn bob_flow(ep: &mut Endpoint, side: &Side<'_>) -> Result<PartyOutcome, ProtocolError> {
    if !side.send(ep)? {
        return Ok(PartyOutcome { flag: false, y: None, received: false });
    }
    ep.send("twopc.step3-go", Tag::Control, vec![CTRL_STEP3])?;
    let y = side.receive(ep)?;
    Ok(PartyOutcome { flag: y.is_some(), received: y.is_some(), y })
}

fn alice_flow(ep: &mut Endpoint, side: &Side<'_>) -> Result<PartyOutcome, ProtocolError> {
    let Some(y) = side.receive(ep)? else {
        return Ok(PartyOutcome { flag: false, y: None, received: false });
    };
    let go = match ep.recv_tag("twopc.step3-go", Tag::Control) {
        Err(ProtocolError::Disconnected) => None,
        r => Some(r?),
    };
    if go.as_deref() != Some(&[CTRL_STEP3][..]) {
        return Ok(PartyOutcome { flag: false, y: Some(y), received: true });
    }
    let delivered = side.send(ep)?;
    Ok(PartyOutcome { flag: delivered, y: Some(y), received: true })
}

#[allow(clippy::too_many_arguments)]
pub fn run_twopc(
    channel: &Channel,
    params: &TwopcParams,
    x_a: &Bits,
    x_b: &Bits,
    f_a: &Circuit,
    f_b: &Circuit,
    alice: &PartyImpl,
    bob: &PartyImpl,
    seed: &Seed,
) -> Result<TwopcRun, ProtocolError> {
    let g_a = params.encoder_circuit(f_a)?;
    let g_b = params.encoder_circuit(f_b)?;
    let dp = params.direction_params();
    dp.rounds()?;
    dp.sfvp.sfs_for(&g_a)?.plan()?;
    let step1 = dealer_step1(x_a, x_b, params, &mut seed::rng(&seed::derive(seed, &["step1"])))?;
    let oracle = dp.sfvp.sfs.backend.needs_oracle().then(WitnessOracle::grant);
    let bob_side = Side {
        params: &dp,
        view: step1.bob_view()?,
        send: &g_a,
        recv: &g_b,
        f_recv: f_b,
        garbler: &params.garbler,
        imp: bob,
        oracle: oracle.as_ref(),
        seed: seed::derive(seed, &["bob"]),
    };
    let alice_side = Side {
        params: &dp,
        view: step1.alice_view()?,
        send: &g_b,
        recv: &g_a,
        f_recv: f_a,
        garbler: &params.garbler,
        imp: alice,
        oracle: oracle.as_ref(),
        seed: seed::derive(seed, &["alice"]),
    };
    let r = run_session(channel, |ep| bob_flow(ep, &bob_side), |ep| alice_flow(ep, &alice_side))?;
    Ok(TwopcRun { alice: r.server?, bob: r.client?, step1, transcript: r.transcript })
}
