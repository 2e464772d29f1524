//! Function value preparation: the server ends with `f(x)` for a client
//! input `x`, at a cost independent of `|f(x)|`.
//!
//! The parties first sample a garbled circuit of `f` through randomized SFS,
//! so the client learns the shared garbling coins `r` and the server the
//! garbled circuit. The client then sends the input labels for `x`, which
//! are only `n·κ` bits, and the server evaluates.

mod two;

use std::sync::Arc;

use sfslab_core::circuits::{BoolFunction, Circuit};
use sfslab_core::garbling::{Garbler, InputEncoding};
use sfslab_core::seed::{self, Seed};
use sfslab_core::Bits;

use crate::runtime::{run_session, Channel, Endpoint, ProtocolError, Tag, Transcript, WireReader, WireWriter};
use crate::sfs::{
    party_seeds, sfs_client, sfs_server, SeededFn, ServerOutcome, ServerStrategy, SfsOutcome, SfsParams, Stage,
};
use crate::succ_test::{AokBackend, WitnessOracle};

pub use two::{
    aok_rounds, client_adversary, run_sfvp2, sfvp2_client, sfvp2_server, ClientStrategy, HonestClient, InputSwap,
    Sfvp2ClientOutcome, Sfvp2Params, Sfvp2Public, Sfvp2Run, Sfvp2ServerOutcome, Sfvp2Setup, CLIENT_ADVERSARIES,
    DEFAULT_AOK_SLOPE,
};

pub const STEP_INPUT_ENCODING: &str = "sfvp.input-encoding";

/// `(r ‖ r_gcin) ↦ GarbleC(C, r; r_gcin)` as a flat bit string.
#[derive(Debug, Clone)]
pub struct GarbleFn {
    garbler: Garbler,
    circuit: Circuit,
}

impl GarbleFn {
    pub fn new(garbler: Garbler, circuit: Circuit) -> Self {
        Self { garbler, circuit }
    }

    pub fn r_len(&self) -> usize {
        self.garbler.r_len(&self.circuit)
    }
}

impl BoolFunction for GarbleFn {
    fn n_inputs(&self) -> usize {
        self.garbler.r_len(&self.circuit) + self.garbler.r_gcin_len(&self.circuit)
    }

    fn n_outputs(&self) -> usize {
        self.garbler.encoding_len(&self.circuit)
    }

    fn eval_unchecked(&self, x: &Bits) -> Bits {
        let k = self.r_len();
        self.garbler
            .garble_circuit(&self.circuit, &x.slice(0..k), &x.slice(k..x.len()))
            .expect("lengths fixed by the arity")
            .bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfvpParams {
    /// SFS settings. `n` and `m` are filled in from the circuit; `kappa`
    /// also sets the length of the seed for the garbler's internal coins.
    pub sfs: SfsParams,
    pub garbler: Garbler,
}

impl SfvpParams {
    pub fn new(kappa: usize) -> Self {
        Self { sfs: SfsParams::new(0, 0, kappa), garbler: Garbler::sha256(kappa) }
    }

    pub fn with_stage(mut self, stage: Stage) -> Self {
        self.sfs.stage = stage;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.sfs.rounds_cap = Some(cap);
        self
    }

    pub fn with_backend(mut self, backend: AokBackend) -> Self {
        self.sfs.backend = backend;
        self
    }

    /// The sampled function: `(r ‖ s) ↦ GarbleC(C, r; PRG(s))`.
    pub fn sampled_function(&self, c: &Circuit) -> Result<SeededFn, ProtocolError> {
        let g = GarbleFn::new(self.garbler.clone(), c.clone());
        let r_len = g.r_len();
        SeededFn::new(Arc::new(g), r_len, self.sfs.kappa)
    }

    /// SFS parameters for sampling the garbling of `c`.
    pub fn sfs_for(&self, c: &Circuit) -> Result<SfsParams, ProtocolError> {
        if matches!(self.sfs.stage, Stage::Test) {
            return Err(ProtocolError::Config("value preparation needs a stage that keeps an output".into()));
        }
        let g = self.sampled_function(c)?;
        let mut p = self.sfs.clone();
        p.n = g.n_inputs();
        p.m = g.n_outputs();
        Ok(p)
    }
}

#[derive(Debug, Clone)]
pub struct SfvpClientOutcome {
    pub flag: bool,
    /// Shared garbling coins from the kept SFS round.
    pub r: Option<Bits>,
    pub sfs: SfsOutcome,
}

#[derive(Debug, Clone)]
pub struct SfvpServerOutcome {
    pub flag: bool,
    pub y: Option<Bits>,
    pub sfs: ServerOutcome,
}

pub fn sfvp_client(
    ep: &mut Endpoint,
    params: &SfvpParams,
    c: &Circuit,
    x: &Bits,
    oracle: Option<&WitnessOracle>,
    seed: &Seed,
) -> Result<SfvpClientOutcome, ProtocolError> {
    if x.len() != c.n_inputs() {
        return Err(ProtocolError::Config(format!("input has {} bits, circuit takes {}", x.len(), c.n_inputs())));
    }
    let g = params.sampled_function(c)?;
    let sp = params.sfs_for(c)?;
    let gf: Arc<dyn BoolFunction> = Arc::new(g.clone());
    let sfs = sfs_client(ep, &sp, &gf, oracle, seed)?;
    let Some(rs) = sfs.x_out.clone().filter(|_| sfs.flag) else {
        return Ok(SfvpClientOutcome { flag: false, r: None, sfs });
    };
    let (r, _) = g.split(&rs);
    let ie = params.garbler.garble_input(x, &r)?;
    ep.send(STEP_INPUT_ENCODING, Tag::Classical, WireWriter::new().bits(&ie.to_flat()).finish())?;
    Ok(SfvpClientOutcome { flag: true, r: Some(r), sfs })
}

pub fn sfvp_server(
    ep: &mut Endpoint,
    params: &SfvpParams,
    c: &Circuit,
    strategy: &dyn ServerStrategy,
    oracle: Option<&WitnessOracle>,
    seed: &Seed,
) -> Result<SfvpServerOutcome, ProtocolError> {
    let g = params.sampled_function(c)?;
    let sp = params.sfs_for(c)?;
    let sfs = sfs_server(ep, &sp, &g, strategy, oracle, seed)?;
    let Some(enc) = sfs.y_out.clone().filter(|_| sfs.flag) else {
        return Ok(SfvpServerOutcome { flag: false, y: None, sfs });
    };
    let msg = ep.recv_tag(STEP_INPUT_ENCODING, Tag::Classical)?;
    let mut rd = WireReader::new(&msg);
    let flat = rd.bits_exact(params.garbler.r_len(c))?;
    rd.finish()?;
    let ie = InputEncoding::from_flat(&flat, params.garbler.kappa)?;
    let ce = params.garbler.encoding_from_flat(c, enc)?;
    let y = params.garbler.degarble(c, &ce, &ie)?;
    Ok(SfvpServerOutcome { flag: true, y: Some(y), sfs })
}

#[derive(Debug)]
pub struct SfvpRun {
    pub client: SfvpClientOutcome,
    pub server: SfvpServerOutcome,
    pub transcript: Transcript,
}

pub fn run_sfvp(
    channel: &Channel,
    params: &SfvpParams,
    c: &Circuit,
    x: &Bits,
    strategy: Arc<dyn ServerStrategy>,
    seed: &Seed,
) -> Result<SfvpRun, ProtocolError> {
    params.sfs_for(c)?.plan()?;
    let (cs, ss) = party_seeds(seed);
    let oracle = params.sfs.backend.needs_oracle().then(WitnessOracle::grant);
    let r = run_session(
        channel,
        |ep| sfvp_client(ep, params, c, x, oracle.as_ref(), &seed::derive(&cs, &["sfvp"])),
        |ep| sfvp_server(ep, params, c, strategy.as_ref(), oracle.as_ref(), &seed::derive(&ss, &["sfvp"])),
    )?;
    Ok(SfvpRun { client: r.client?, server: r.server?, transcript: r.transcript })
}
