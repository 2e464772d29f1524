//! One round of the test/computation pair, the client's amplification driver
//! and the server's dispatch loop.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use sfslab_core::circuits::BoolFunction;
use sfslab_core::primitives::HashFn;
use sfslab_core::qsim::{RegisterLayout, SparseState};
use sfslab_core::seed::{self, Seed};
use sfslab_core::Bits;

use super::strategy::{ServerStrategy, WitnessContext};
use super::{cat, pick_test_kind, Mode, SfsParams, Stage, TestKind, REG_IN, REG_INPAD, REG_OUT, REG_OUTPAD, REG_SUB};
use crate::runtime::{is_abort, Endpoint, ProtocolError, Tag, WireReader, WireWriter};
use crate::succ_test::{succ_prove, succ_verify, RelationSpec, WitnessOracle};

const CTRL_CHALLENGE: u8 = 1;
const CTRL_SELECT: u8 = 2;
const CTRL_DONE: u8 = 3;
const NO_SELECTION: u64 = u64::MAX;
/// Commitment hashes never drop below this many output bits.
const MIN_HASH_LEN: usize = 64;

/// Output length of the hash used for witness commitments.
pub fn hash_len(kappa: usize) -> usize {
    kappa.max(MIN_HASH_LEN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientSecrets {
    pub x0: Bits,
    pub x1: Bits,
    pub r0_in: Bits,
    pub r1_in: Bits,
    pub r0_out: Bits,
    pub r1_out: Bits,
    /// `(θ0, θ1)`, set once step 2 passes.
    pub theta: Option<(bool, bool)>,
}

impl ClientSecrets {
    pub fn sample<R: RngCore + ?Sized>(n: usize, kappa: usize, rng: &mut R) -> Self {
        Self {
            x0: Bits::random(rng, n),
            x1: Bits::random(rng, n),
            r0_in: Bits::random(rng, kappa),
            r1_in: Bits::random(rng, kappa),
            r0_out: Bits::random(rng, kappa),
            r1_out: Bits::random(rng, kappa),
            theta: None,
        }
    }

    pub fn state(&self) -> SparseState {
        let n = self.x0.len();
        let kappa = self.r0_in.len();
        let branch = |b: bool, x: &Bits, ri: &Bits, ro: &Bits| cat(&[&Bits::from_bools(&[b]), x, ri, ro]);
        SparseState::make_branch_pair(
            state_layout(n, kappa),
            branch(false, &self.x0, &self.r0_in, &self.r0_out),
            branch(true, &self.x1, &self.r1_in, &self.r1_out),
            false,
            false,
        )
        .expect("branches differ in the sub register")
    }

    /// Statement of the computational-basis test: `x0 ‖ x1 ‖ r0_out ‖ r1_out`.
    pub fn comp_statement(&self) -> Bits {
        cat(&[&self.x0, &self.x1, &self.r0_out, &self.r1_out])
    }

    /// Statement of the Hadamard-basis test: the above followed by `θ0 ‖ θ1`.
    pub fn hadamard_statement(&self) -> Bits {
        let (t0, t1) = self.theta.expect("step 2 completed");
        cat(&[&self.comp_statement(), &Bits::from_bools(&[t0, t1])])
    }
}

/// Layout of the client's state: `sub:1, in:n, inpad:κ, outpad:κ`. The
/// server appends `out:m`.
pub fn state_layout(n: usize, kappa: usize) -> RegisterLayout {
    RegisterLayout::new(&[(REG_SUB, 1), (REG_IN, n), (REG_INPAD, kappa), (REG_OUTPAD, kappa)]).expect("distinct names")
}

pub fn client_step1_prepare<R: RngCore + ?Sized>(n: usize, kappa: usize, rng: &mut R) -> (ClientSecrets, SparseState) {
    let s = ClientSecrets::sample(n, kappa, rng);
    let st = s.state();
    (s, st)
}

/// Rejects `d_inpad = 0`; otherwise stores `θ_b = d_in·x_b ⊕ d_inpad·r_b_in`.
pub fn client_step2_check(s: &mut ClientSecrets, d_in: &Bits, d_inpad: &Bits) -> bool {
    if d_inpad.is_zero() {
        return false;
    }
    s.theta = Some((d_in.dot(&s.x0) ^ d_inpad.dot(&s.r0_in), d_in.dot(&s.x1) ^ d_inpad.dot(&s.r1_in)));
    true
}

/// Accepts `c ∈ {0‖r0_out, 1‖r1_out}` and returns the matching `x_b`, plus
/// whether the two output paddings collided. The sub bit decides the branch,
/// and the `x0` case is checked first.
pub fn client_comp_check(s: &ClientSecrets, c: &Bits) -> Option<(Bits, bool)> {
    let collision = s.r0_out == s.r1_out;
    if collision {
        log::info!("output paddings collide; branch decided by the sub bit");
    }
    let b0 = cat(&[&Bits::from_bools(&[false]), &s.r0_out]);
    let b1 = cat(&[&Bits::from_bools(&[true]), &s.r1_out]);
    if *c == b0 {
        Some((s.x0.clone(), collision))
    } else if *c == b1 {
        Some((s.x1.clone(), collision))
    } else {
        None
    }
}

fn split_statement(x: &Bits, n: usize, kappa: usize) -> [Bits; 4] {
    [x.slice(0..n), x.slice(n..2 * n), x.slice(2 * n..2 * n + kappa), x.slice(2 * n + kappa..2 * n + 2 * kappa)]
}

/// `w ∈ {0‖r0_out‖f(x0), 1‖r1_out‖f(x1)}` over `x = x0‖x1‖r0_out‖r1_out`.
pub fn comp_test_relation(n: usize, kappa: usize, f: Arc<dyn BoolFunction>) -> RelationSpec {
    let m = f.n_outputs();
    RelationSpec::native("sfs-computational", 2 * n + 2 * kappa, 1 + kappa + m, move |x, w| {
        let [x0, x1, r0, r1] = split_statement(x, n, kappa);
        let (b, x_b, r_b) = if w.get(0) { (true, x1, r1) } else { (false, x0, r0) };
        *w == cat(&[&Bits::from_bools(&[b]), &r_b, &f.eval_unchecked(&x_b)])
    })
}

/// Parity identity
/// `d_sub ⊕ d_outpad·(r0_out⊕r1_out) ⊕ d_out·(f(x0)⊕f(x1)) = θ0 ⊕ θ1`
/// over `x = x0‖x1‖r0_out‖r1_out‖θ0‖θ1` and `w = d_sub‖d_outpad‖d_out`.
pub fn hadamard_test_relation(n: usize, kappa: usize, f: Arc<dyn BoolFunction>) -> RelationSpec {
    let m = f.n_outputs();
    RelationSpec::native("sfs-hadamard", 2 * n + 2 * kappa + 2, 1 + kappa + m, move |x, w| {
        let [x0, x1, r0, r1] = split_statement(x, n, kappa);
        let theta = x.get(2 * n + 2 * kappa) ^ x.get(2 * n + 2 * kappa + 1);
        let df = f.eval_unchecked(&x0).xor(&f.eval_unchecked(&x1));
        let lhs = w.get(0) ^ w.slice(1..1 + kappa).dot(&r0.xor(&r1)) ^ w.slice(1 + kappa..w.len()).dot(&df);
        lhs == theta
    })
}

/// The parity identity for a full Hadamard outcome `d`, from the client's
/// secrets.
pub fn hadamard_parity(s: &ClientSecrets, f: &dyn BoolFunction, d: &Bits) -> bool {
    let kappa = s.r0_out.len();
    let (t0, t1) = s.theta.expect("step 2 completed");
    let df = f.eval_unchecked(&s.x0).xor(&f.eval_unchecked(&s.x1));
    let lhs = d.get(0) ^ d.slice(1..1 + kappa).dot(&s.r0_out.xor(&s.r1_out)) ^ d.slice(1 + kappa..d.len()).dot(&df);
    lhs == (t0 ^ t1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundFailure {
    /// The server reported `d_inpad = 0`.
    InpadZero,
    /// The computation-mode reply matched neither branch.
    CompReply,
    Test {
        kind: TestKind,
        phase: u8,
    },
}

#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub index: u64,
    pub mode: Mode,
    pub pass: bool,
    pub failure: Option<RoundFailure>,
    /// Computation rounds: the `x_b` the reply selected.
    pub x_out: Option<Bits>,
    pub outpad_collision: bool,
    pub secrets: ClientSecrets,
    /// Test rounds under the reveal backend: the witness of the second argument.
    pub revealed_witness: Option<Bits>,
}

#[derive(Debug, Clone)]
pub struct SfsOutcome {
    pub flag: bool,
    pub x_out: Option<Bits>,
    pub rounds: Vec<RoundRecord>,
    /// Round whose output was kept.
    pub selected: Option<u64>,
}

impl SfsOutcome {
    pub fn first_failure(&self) -> Option<RoundFailure> {
        self.rounds.iter().find_map(|r| r.failure)
    }
}

struct Client<'a> {
    params: &'a SfsParams,
    f: &'a Arc<dyn BoolFunction>,
    oracle: Option<&'a WitnessOracle>,
    seed: Seed,
    plan_rng: ChaCha20Rng,
    rounds: Vec<RoundRecord>,
}

impl Client<'_> {
    fn round(&mut self, ep: &mut Endpoint, mode: Mode) -> Result<bool, ProtocolError> {
        let (n, kappa) = (self.params.n, self.params.kappa);
        let index = self.rounds.len() as u64;
        let mut rng = seed::rng(&seed::derive_indexed(&self.seed, "round", index));
        let (mut secrets, state) = client_step1_prepare(n, kappa, &mut rng);
        ep.send("sfs.state", Tag::State, state.to_bytes())?;

        let msg = ep.recv_tag("sfs.hadamard-in", Tag::Classical)?;
        let mut r = WireReader::new(&msg);
        let d_in = r.bits_exact(n)?;
        let d_inpad = r.bits_exact(kappa)?;
        r.finish()?;

        let mut rec = RoundRecord {
            index,
            mode,
            pass: false,
            failure: None,
            x_out: None,
            outpad_collision: false,
            secrets: secrets.clone(),
            revealed_witness: None,
        };
        if !client_step2_check(&mut secrets, &d_in, &d_inpad) {
            rec.failure = Some(RoundFailure::InpadZero);
            self.rounds.push(rec);
            return Ok(false);
        }
        rec.secrets = secrets.clone();

        match mode {
            Mode::Comp => {
                ep.send("sfs.challenge", Tag::Control, vec![CTRL_CHALLENGE, mode.wire()])?;
                let msg = ep.recv_tag("sfs.comp-reply", Tag::Classical)?;
                let mut r = WireReader::new(&msg);
                let c = r.bits()?;
                r.finish()?;
                match client_comp_check(&secrets, &c) {
                    Some((x, collision)) => {
                        rec.pass = true;
                        rec.x_out = Some(x);
                        rec.outpad_collision = collision;
                    }
                    None => rec.failure = Some(RoundFailure::CompReply),
                }
            }
            Mode::Test(kind) => {
                let w_len = 1 + kappa + self.params.m;
                let h = HashFn::sample(&mut rng, w_len, hash_len(kappa));
                let mut msg = vec![CTRL_CHALLENGE, mode.wire()];
                msg.extend(h.to_bytes());
                ep.send("sfs.challenge", Tag::Control, msg)?;
                let (rel, stmt) = match kind {
                    TestKind::Computational => (comp_test_relation(n, kappa, self.f.clone()), secrets.comp_statement()),
                    TestKind::Hadamard => {
                        (hadamard_test_relation(n, kappa, self.f.clone()), secrets.hadamard_statement())
                    }
                };
                let out = succ_verify(ep, &rel, &stmt, &h, self.params.backend, self.oracle, &mut rng)?;
                rec.pass = out.pass;
                rec.revealed_witness = out.revealed_witness;
                if let Some(phase) = out.failed_phase {
                    rec.failure = Some(RoundFailure::Test { kind, phase });
                }
            }
        }
        let pass = rec.pass;
        self.rounds.push(rec);
        Ok(pass)
    }

    fn test_mode(&mut self) -> Mode {
        Mode::Test(pick_test_kind(self.params.force_test, &mut self.plan_rng))
    }

    /// One amplification layer; the index of its kept computation round, or
    /// `None` on failure.
    fn layer(&mut self, ep: &mut Endpoint, rounds: usize, p: f64) -> Result<Option<u64>, ProtocolError> {
        let mut comps = Vec::new();
        for _ in 0..rounds {
            let mode = if self.plan_rng.gen_bool(p.clamp(0.0, 1.0)) { self.test_mode() } else { Mode::Comp };
            if !self.round(ep, mode)? {
                return Ok(None);
            }
            if mode == Mode::Comp {
                comps.push(self.rounds.len() as u64 - 1);
            }
        }
        if comps.is_empty() {
            log::debug!("layer drew no computation round; appending one");
            if !self.round(ep, Mode::Comp)? {
                return Ok(None);
            }
            comps.push(self.rounds.len() as u64 - 1);
        }
        Ok(Some(comps[self.plan_rng.gen_range(0..comps.len())]))
    }

    /// `Some(selection)` when every round passed.
    fn run(&mut self, ep: &mut Endpoint) -> Result<Option<Option<u64>>, ProtocolError> {
        let plan = self.params.plan()?;
        Ok(match self.params.stage {
            Stage::Test => {
                let mode = self.test_mode();
                self.round(ep, mode)?.then_some(None)
            }
            Stage::Comp => self.round(ep, Mode::Comp)?.then_some(Some(0)),
            Stage::Schedule { tests } => {
                for _ in 0..tests {
                    let mode = self.test_mode();
                    if !self.round(ep, mode)? {
                        return Ok(None);
                    }
                }
                self.round(ep, Mode::Comp)?.then_some(Some(tests as u64))
            }
            Stage::Temp => self.layer(ep, plan.inner, plan.p)?.map(Some),
            Stage::Full => {
                let mut picks = Vec::with_capacity(plan.outer);
                for _ in 0..plan.outer {
                    match self.layer(ep, plan.inner, plan.p)? {
                        Some(i) => picks.push(i),
                        None => return Ok(None),
                    }
                }
                Some(Some(picks[self.plan_rng.gen_range(0..picks.len())]))
            }
        })
    }
}

/// Honest client: runs the configured stage, then sends either an abort or
/// the index of the kept round and waits for the server's acknowledgment.
pub fn sfs_client(
    ep: &mut Endpoint,
    params: &SfsParams,
    f: &Arc<dyn BoolFunction>,
    oracle: Option<&WitnessOracle>,
    seed: &Seed,
) -> Result<SfsOutcome, ProtocolError> {
    params.validate(f.as_ref())?;
    let mut client = Client {
        params,
        f,
        oracle,
        seed: *seed,
        plan_rng: seed::rng(&seed::derive(seed, &["plan"])),
        rounds: Vec::new(),
    };
    let result = client.run(ep)?;
    let rounds = client.rounds;
    let Some(selected) = result else {
        ep.send_abort("sfs.abort")?;
        return Ok(SfsOutcome { flag: false, x_out: None, rounds, selected: None });
    };
    let msg = WireWriter::new().u8(CTRL_SELECT).u64(selected.unwrap_or(NO_SELECTION)).finish();
    ep.send("sfs.select", Tag::Control, msg)?;
    let ack = ep.recv_tag("sfs.done", Tag::Control)?;
    if ack != [CTRL_DONE] {
        return Err(ProtocolError::Decode("bad completion acknowledgment".into()));
    }
    let x_out = selected.and_then(|i| rounds[i as usize].x_out.clone());
    Ok(SfsOutcome { flag: true, x_out, rounds, selected })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerOutcome {
    pub flag: bool,
    pub y_out: Option<Bits>,
    pub rounds: u64,
    pub selected: Option<u64>,
}

struct ServerRound<'a> {
    params: &'a SfsParams,
    f: &'a dyn BoolFunction,
    strategy: &'a dyn ServerStrategy,
    oracle: Option<&'a WitnessOracle>,
}

impl ServerRound<'_> {
    /// Serves one round; a computation round yields the kept output.
    fn serve(&self, ep: &mut Endpoint, payload: &[u8], rng: &mut ChaCha20Rng) -> Result<Option<Bits>, ProtocolError> {
        let p = self.params;
        let mut state = SparseState::from_bytes(payload, state_layout(p.n, p.kappa))?;
        state.append_register(REG_OUT, p.m)?;
        let s2 = self.strategy.step2(state, self.f, rng)?;
        ep.send("sfs.hadamard-in", Tag::Classical, WireWriter::new().bits(&s2.d_in).bits(&s2.d_inpad).finish())?;

        let msg = ep.recv_tag("sfs.challenge", Tag::Control)?;
        if msg.len() < 2 || msg[0] != CTRL_CHALLENGE {
            return Err(ProtocolError::Decode("malformed challenge".into()));
        }
        let mode = Mode::from_wire(msg[1]).ok_or_else(|| ProtocolError::Decode("unknown mode".into()))?;
        match mode {
            Mode::Comp => {
                let (c, y) = self.strategy.comp_mode_reply(&s2.state, rng)?;
                ep.send("sfs.comp-reply", Tag::Classical, WireWriter::new().bits(&c).finish())?;
                Ok(Some(y))
            }
            Mode::Test(kind) => {
                let h =
                    HashFn::from_bytes(&msg[2..]).ok_or_else(|| ProtocolError::Decode("hash description".into()))?;
                let w = match kind {
                    TestKind::Computational => self.strategy.comp_test_witness(&s2.state, rng)?,
                    TestKind::Hadamard => self.strategy.hadamard_test_witness(&s2.state, rng)?,
                };
                let phase2 = |x: &Bits| {
                    let ctx = WitnessContext { kind, x, f: self.f, n: p.n, kappa: p.kappa };
                    self.strategy.phase2_witness(&ctx, &w)
                };
                succ_prove(ep, &h, &w, &phase2, p.backend, self.oracle)?;
                Ok(None)
            }
        }
    }
}

/// Server loop: serves rounds until the client selects or aborts.
pub fn sfs_server(
    ep: &mut Endpoint,
    params: &SfsParams,
    f: &dyn BoolFunction,
    strategy: &dyn ServerStrategy,
    oracle: Option<&WitnessOracle>,
    seed: &Seed,
) -> Result<ServerOutcome, ProtocolError> {
    params.validate(f)?;
    let server = ServerRound { params, f, strategy, oracle };
    let mut outputs: HashMap<u64, Bits> = HashMap::new();
    let mut index = 0u64;
    let fail = |rounds| ServerOutcome { flag: false, y_out: None, rounds, selected: None };
    loop {
        let frame = ep.recv()?;
        if is_abort(&frame) {
            return Ok(fail(index));
        }
        match frame.tag {
            Tag::State => {
                let mut rng = seed::rng(&seed::derive_indexed(seed, "round", index));
                match server.serve(ep, &frame.payload, &mut rng) {
                    Ok(Some(y)) => {
                        outputs.insert(index, y);
                    }
                    Ok(None) => {}
                    Err(ProtocolError::Aborted) => return Ok(fail(index + 1)),
                    Err(e) => return Err(e),
                }
                index += 1;
            }
            Tag::Control => {
                let mut r = WireReader::new(&frame.payload);
                if r.u8()? != CTRL_SELECT {
                    return Err(ProtocolError::Decode("expected a selection".into()));
                }
                let sel = r.u64()?;
                r.finish()?;
                let selected = (sel != NO_SELECTION).then_some(sel);
                let y_out = match selected {
                    Some(i) => Some(
                        outputs.remove(&i).ok_or_else(|| ProtocolError::Decode(format!("round {i} kept no output")))?,
                    ),
                    None => None,
                };
                ep.send("sfs.done", Tag::Control, vec![CTRL_DONE])?;
                return Ok(ServerOutcome { flag: true, y_out, rounds: index, selected });
            }
            Tag::Classical => {
                return Err(ProtocolError::UnexpectedTag {
                    step: "sfs.state".into(),
                    expected: Tag::State.name(),
                    got: Tag::Classical.name(),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use sfslab_core::circuits::builders;

    #[test]
    fn theta_parity_example() {
        let mut s = ClientSecrets::sample(2, 2, &mut ChaCha8Rng::seed_from_u64(0));
        s.x0 = Bits::parse("11").unwrap();
        s.r0_in = Bits::parse("10").unwrap();
        assert!(client_step2_check(&mut s, &Bits::parse("10").unwrap(), &Bits::parse("01").unwrap()));
        assert!(s.theta.unwrap().0);
        assert!(!client_step2_check(&mut s, &Bits::parse("10").unwrap(), &Bits::zeros(2)));
    }

    #[test]
    fn state_shape() {
        let (s, st) = client_step1_prepare(3, 4, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(st.layout().total_width(), 1 + 3 + 4 + 4);
        let mut b0 = Bits::from_bools(&[false]);
        for p in [&s.x0, &s.r0_in, &s.r0_out] {
            b0.extend(p);
        }
        assert_eq!(st.branches()[0].basis, b0);
    }

    #[test]
    fn comp_check_handles_collisions_and_garbage() {
        let mut s = ClientSecrets::sample(2, 4, &mut ChaCha8Rng::seed_from_u64(2));
        s.r1_out = s.r0_out.clone();
        let c0 = cat(&[&Bits::from_bools(&[false]), &s.r0_out]);
        let c1 = cat(&[&Bits::from_bools(&[true]), &s.r1_out]);
        assert_eq!(client_comp_check(&s, &c0), Some((s.x0.clone(), true)));
        assert_eq!(client_comp_check(&s, &c1), Some((s.x1.clone(), true)));
        let mut bad = c0.clone();
        bad.set(1, !bad.get(1));
        assert_eq!(client_comp_check(&s, &bad), None);
    }

    #[test]
    fn relations_accept_exactly_the_honest_witnesses() {
        let f: Arc<dyn BoolFunction> = Arc::new(builders::ripple_adder(1));
        let mut s = ClientSecrets::sample(2, 3, &mut ChaCha8Rng::seed_from_u64(3));
        let rel = comp_test_relation(2, 3, f.clone());
        let w0 = cat(&[&Bits::from_bools(&[false]), &s.r0_out, &f.eval_unchecked(&s.x0)]);
        assert!(rel.holds(&s.comp_statement(), &w0));
        let mut w = w0.clone();
        w.set(0, true);
        assert!(!rel.holds(&s.comp_statement(), &w));

        assert!(client_step2_check(&mut s, &Bits::parse("01").unwrap(), &Bits::parse("110").unwrap()));
        let had = hadamard_test_relation(2, 3, f.clone());
        for v in 0..64u64 {
            let d = Bits::from_u64(v, 1 + 3 + 2);
            assert_eq!(had.holds(&s.hadamard_statement(), &d), hadamard_parity(&s, f.as_ref(), &d));
        }
    }
}
