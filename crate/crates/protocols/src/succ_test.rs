//! Commit, prove, reveal, prove: the server commits to a witness with a
//! hash, proves it knows a preimage, and only then learns the statement `x`
//! and proves `R(x, w) = 1` for the committed `w`.
//!
//! Two argument-of-knowledge backends share one three-move shape
//! (first message, challenge, response):
//!
//! * `reveal` sends the witness itself. Sound but not succinct.
//! * `merkle-oracle` sends a Merkle root and `k` authenticated 32-byte leaves,
//!   so wire cost does not grow with `|w|`. Its soundness comes from the
//!   harness: the verifier also reads the prover's witness register through a
//!   [`WitnessOracle`] and checks the statement on it directly. That shortcut
//!   exists only in the simulated harness and stands in for a real succinct
//!   argument.

use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, RngCore};
use sfslab_core::circuits::{BoolFunction, Circuit, CircuitError};
use sfslab_core::primitives::merkle::{self, Digest32};
use sfslab_core::primitives::{HashFn, MerkleTree};
use sfslab_core::Bits;

use crate::runtime::{Endpoint, ProtocolError, Tag, WireReader, WireWriter};

/// Challenged leaves per merkle-oracle proof.
pub const DEFAULT_K: usize = 16;
/// Merkle paths are lifted to this depth so their length ignores `|w|`.
pub const LIFT_DEPTH: usize = 32;
const LEAF_BYTES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AokBackend {
    Reveal,
    MerkleOracle { k: usize },
}

impl AokBackend {
    pub fn merkle() -> Self {
        AokBackend::MerkleOracle { k: DEFAULT_K }
    }

    pub fn tag(self) -> u8 {
        match self {
            AokBackend::Reveal => 1,
            AokBackend::MerkleOracle { .. } => 2,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reveal" => Some(AokBackend::Reveal),
            "merkle-oracle" | "merkle" => Some(AokBackend::merkle()),
            _ => None,
        }
    }

    pub fn needs_oracle(self) -> bool {
        matches!(self, AokBackend::MerkleOracle { .. })
    }
}

impl fmt::Display for AokBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AokBackend::Reveal => f.write_str("reveal"),
            AokBackend::MerkleOracle { .. } => f.write_str("merkle-oracle"),
        }
    }
}

/// Harness-granted read access to the prover's witness register. Only
/// sessions set up by the harness hold one.
#[derive(Debug, Clone, Default)]
pub struct WitnessOracle(Arc<Mutex<Option<Bits>>>);

impl WitnessOracle {
    pub fn grant() -> Self {
        Self::default()
    }

    fn store(&self, w: &Bits) {
        *self.0.lock().expect("oracle lock") = Some(w.clone());
    }

    fn read(&self) -> Option<Bits> {
        self.0.lock().expect("oracle lock").clone()
    }
}

type RelationEval = dyn Fn(&Bits, &Bits) -> bool + Send + Sync;

/// A total, deterministic predicate `R(x, w)` on fixed-length strings.
#[derive(Clone)]
pub struct RelationSpec {
    pub name: String,
    pub x_len: usize,
    pub w_len: usize,
    eval: Arc<RelationEval>,
}

impl fmt::Debug for RelationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RelationSpec({}, x:{}, w:{})", self.name, self.x_len, self.w_len)
    }
}

impl RelationSpec {
    pub fn native(
        name: impl Into<String>,
        x_len: usize,
        w_len: usize,
        eval: impl Fn(&Bits, &Bits) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), x_len, w_len, eval: Arc::new(eval) }
    }

    /// Relation computed by a one-output circuit on `x ‖ w`.
    pub fn from_circuit(name: impl Into<String>, c: Circuit, x_len: usize) -> Result<Self, CircuitError> {
        if c.n_outputs() != 1 || c.n_inputs() < x_len {
            return Err(CircuitError::Arity { expected: 1, got: c.n_outputs() });
        }
        let w_len = c.n_inputs() - x_len;
        Ok(Self::native(name, x_len, w_len, move |x, w| c.eval_unchecked(&Bits::concat([x, w])).get(0)))
    }

    /// False on strings of the wrong length.
    pub fn holds(&self, x: &Bits, w: &Bits) -> bool {
        x.len() == self.x_len && w.len() == self.w_len && (self.eval)(x, w)
    }
}

fn leaves(w: &Bits) -> Vec<[u8; LEAF_BYTES]> {
    let bytes = w.to_bytes();
    if bytes.is_empty() {
        return vec![[0; LEAF_BYTES]];
    }
    bytes
        .chunks(LEAF_BYTES)
        .map(|c| {
            let mut l = [0; LEAF_BYTES];
            l[..c.len()].copy_from_slice(c);
            l
        })
        .collect()
}

fn n_leaves(w_len: usize) -> usize {
    w_len.div_ceil(8).div_ceil(LEAF_BYTES).max(1)
}

fn lifted_root(w: &Bits) -> Digest32 {
    MerkleTree::build(&leaves(w)).expect("at least one leaf").lifted_root(LIFT_DEPTH)
}

/// Prover half of one argument.
pub struct AokProver {
    backend: AokBackend,
    witness: Bits,
    tree: Option<(MerkleTree, Vec<[u8; LEAF_BYTES]>)>,
}

impl AokProver {
    /// Loads `w` into the witness register, visible through `oracle`.
    pub fn new(backend: AokBackend, w: Bits, oracle: Option<&WitnessOracle>) -> Self {
        if let Some(o) = oracle {
            o.store(&w);
        }
        let tree = backend.needs_oracle().then(|| {
            let l = leaves(&w);
            (MerkleTree::build(&l).expect("at least one leaf"), l)
        });
        Self { backend, witness: w, tree }
    }

    pub fn first_message(&self) -> Vec<u8> {
        match &self.tree {
            Some((t, _)) => t.lifted_root(LIFT_DEPTH).to_vec(),
            None => Vec::new(),
        }
    }

    pub fn respond(&self, e: &[u8]) -> Result<Vec<u8>, ProtocolError> {
        match (&self.backend, &self.tree) {
            (AokBackend::Reveal, _) => Ok(WireWriter::new().bits(&self.witness).finish()),
            (AokBackend::MerkleOracle { k }, Some((t, l))) => {
                let mut r = WireReader::new(e);
                let mut out = WireWriter::new();
                for _ in 0..*k {
                    let i = r.u32()? as usize;
                    let path = t.prove_lifted(i, LIFT_DEPTH).map_err(|e| ProtocolError::Decode(e.to_string()))?;
                    out = out.raw(&l[i]);
                    for d in &path {
                        out = out.raw(d);
                    }
                }
                r.finish()?;
                Ok(out.finish())
            }
            (AokBackend::MerkleOracle { .. }, None) => unreachable!("tree built for merkle backend"),
        }
    }
}

/// Verifier challenge for a witness of `w_len` bits.
pub fn aok_challenge<R: RngCore + ?Sized>(backend: AokBackend, w_len: usize, rng: &mut R) -> Vec<u8> {
    match backend {
        AokBackend::Reveal => Vec::new(),
        AokBackend::MerkleOracle { k } => {
            let n = n_leaves(w_len);
            (0..k).fold(WireWriter::new(), |w, _| w.u32(rng.gen_range(0..n) as u32)).finish()
        }
    }
}

/// Checks one argument that some `w` of `w_len` bits satisfies `pred`.
/// Malformed prover messages reject; only a missing oracle grant is an error.
pub fn aok_verify(
    backend: AokBackend,
    w_len: usize,
    a: &[u8],
    e: &[u8],
    z: &[u8],
    oracle: Option<&WitnessOracle>,
    pred: &dyn Fn(&Bits) -> bool,
) -> Result<bool, ProtocolError> {
    match backend {
        AokBackend::Reveal => {
            let mut r = WireReader::new(z);
            let Ok(w) = r.bits_exact(w_len) else { return Ok(false) };
            Ok(r.finish().is_ok() && a.is_empty() && pred(&w))
        }
        AokBackend::MerkleOracle { k } => {
            let oracle = oracle.ok_or(ProtocolError::OracleDenied)?;
            let Ok(root) = <Digest32>::try_from(a) else {
                return Ok(false);
            };
            let mut er = WireReader::new(e);
            let mut zr = WireReader::new(z);
            let mut opened = Vec::with_capacity(k);
            for _ in 0..k {
                let i = er.u32()? as usize;
                let Ok(leaf) = zr.raw(LEAF_BYTES) else { return Ok(false) };
                let mut path = Vec::with_capacity(LIFT_DEPTH);
                for _ in 0..LIFT_DEPTH {
                    let Ok(d) = zr.raw(32) else { return Ok(false) };
                    path.push(<Digest32>::try_from(d).expect("32 bytes"));
                }
                if !merkle::verify(&root, i, leaf, &path).unwrap_or(false) {
                    return Ok(false);
                }
                opened.push((i, leaf));
            }
            if zr.finish().is_err() {
                return Ok(false);
            }
            let w = oracle.read().ok_or(ProtocolError::OracleDenied)?;
            if w.len() != w_len || lifted_root(&w) != root {
                return Ok(false);
            }
            let l = leaves(&w);
            Ok(opened.iter().all(|(i, leaf)| l.get(*i).is_some_and(|x| x[..] == leaf[..])) && pred(&w))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccOutcome {
    pub pass: bool,
    /// Phase whose argument rejected, if any.
    pub failed_phase: Option<u8>,
    /// Witness carried by the second argument under the reveal backend.
    pub revealed_witness: Option<Bits>,
}

fn revealed(backend: AokBackend, z: &[u8]) -> Option<Bits> {
    match backend {
        AokBackend::Reveal => WireReader::new(z).bits().ok(),
        AokBackend::MerkleOracle { .. } => None,
    }
}

/// Verifier side. Assumes `h` was already sent. On a phase-1 rejection `x`
/// is never sent and the caller is left to abort.
pub fn succ_verify<R: RngCore + ?Sized>(
    ep: &mut Endpoint,
    rel: &RelationSpec,
    x: &Bits,
    h: &HashFn,
    backend: AokBackend,
    oracle: Option<&WitnessOracle>,
    rng: &mut R,
) -> Result<SuccOutcome, ProtocolError> {
    let msg = ep.recv_tag("succ.commit", Tag::Classical)?;
    let mut r = WireReader::new(&msg);
    if r.u8()? != backend.tag() {
        return Err(ProtocolError::Config("argument backend differs between parties".into()));
    }
    let c = r.bits_exact(h.kappa)?;
    let a1 = r.bytes()?.to_vec();
    r.finish()?;

    let e1 = aok_challenge(backend, rel.w_len, rng);
    ep.send("succ.aok1-challenge", Tag::Classical, e1.clone())?;
    let z1 = ep.recv_tag("succ.aok1-response", Tag::Classical)?;
    let commits = |w: &Bits| h.eval(w).is_ok_and(|d| d == c);
    if !aok_verify(backend, rel.w_len, &a1, &e1, &z1, oracle, &commits)? {
        return Ok(SuccOutcome { pass: false, failed_phase: Some(1), revealed_witness: None });
    }

    ep.send("succ.reveal", Tag::Classical, WireWriter::new().bits(x).finish())?;
    let a2 = ep.recv_tag("succ.aok2-commit", Tag::Classical)?;
    let e2 = aok_challenge(backend, rel.w_len, rng);
    ep.send("succ.aok2-challenge", Tag::Classical, e2.clone())?;
    let z2 = ep.recv_tag("succ.aok2-response", Tag::Classical)?;
    let both = |w: &Bits| commits(w) && rel.holds(x, w);
    let pass = aok_verify(backend, rel.w_len, &a2, &e2, &z2, oracle, &both)?;
    Ok(SuccOutcome { pass, failed_phase: (!pass).then_some(2), revealed_witness: revealed(backend, &z2) })
}

/// Prover side. `phase2` picks the witness argued after `x` is revealed;
/// honest provers return the committed one.
pub fn succ_prove(
    ep: &mut Endpoint,
    h: &HashFn,
    w: &Bits,
    phase2: &dyn Fn(&Bits) -> Bits,
    backend: AokBackend,
    oracle: Option<&WitnessOracle>,
) -> Result<(), ProtocolError> {
    let c = h.eval(w)?;
    let p1 = AokProver::new(backend, w.clone(), oracle);
    let msg = WireWriter::new().u8(backend.tag()).bits(&c).bytes(&p1.first_message()).finish();
    ep.send("succ.commit", Tag::Classical, msg)?;
    let e1 = ep.recv_tag("succ.aok1-challenge", Tag::Classical)?;
    ep.send("succ.aok1-response", Tag::Classical, p1.respond(&e1)?)?;

    let xm = ep.recv_tag("succ.reveal", Tag::Classical)?;
    let mut r = WireReader::new(&xm);
    let x = r.bits()?;
    r.finish()?;
    let p2 = AokProver::new(backend, phase2(&x), oracle);
    ep.send("succ.aok2-commit", Tag::Classical, p2.first_message())?;
    let e2 = ep.recv_tag("succ.aok2-challenge", Tag::Classical)?;
    ep.send("succ.aok2-response", Tag::Classical, p2.respond(&e2)?)?;
    Ok(())
}

/// Standalone verifier: samples and sends the hash, then verifies.
pub fn run_succ_test_client<R: RngCore + ?Sized>(
    ep: &mut Endpoint,
    rel: &RelationSpec,
    x: &Bits,
    hash_len: usize,
    backend: AokBackend,
    oracle: Option<&WitnessOracle>,
    rng: &mut R,
) -> Result<SuccOutcome, ProtocolError> {
    let h = HashFn::sample(rng, rel.w_len, hash_len);
    ep.send("succ.hash", Tag::Classical, h.to_bytes())?;
    succ_verify(ep, rel, x, &h, backend, oracle, rng)
}

/// Standalone prover matching [`run_succ_test_client`]. Returns `Ok(false)`
/// when the verifier aborts after phase 1.
pub fn run_succ_test_server(
    ep: &mut Endpoint,
    w: &Bits,
    phase2: &dyn Fn(&Bits) -> Bits,
    backend: AokBackend,
    oracle: Option<&WitnessOracle>,
) -> Result<bool, ProtocolError> {
    let hb = ep.recv_tag("succ.hash", Tag::Classical)?;
    let h = HashFn::from_bytes(&hb).ok_or_else(|| ProtocolError::Decode("hash description".into()))?;
    match succ_prove(ep, &h, w, phase2, backend, oracle) {
        Ok(()) => Ok(true),
        Err(ProtocolError::Aborted) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn leaf_count_matches_chunking() {
        for len in [0, 1, 8, 256, 257, 1024, 1000] {
            assert_eq!(leaves(&Bits::zeros(len)).len(), n_leaves(len), "{len}");
        }
    }

    #[test]
    fn backends_accept_honest_and_reject_wrong_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Bits::random(&mut rng, 700);
        let mut other = w.clone();
        other.set(699, !w.get(699));
        for backend in [AokBackend::Reveal, AokBackend::merkle()] {
            let oracle = WitnessOracle::grant();
            let p = AokProver::new(backend, w.clone(), Some(&oracle));
            let a = p.first_message();
            let e = aok_challenge(backend, 700, &mut rng);
            let z = p.respond(&e).unwrap();
            assert!(aok_verify(backend, 700, &a, &e, &z, Some(&oracle), &|x| *x == w).unwrap());
            assert!(!aok_verify(backend, 700, &a, &e, &z, Some(&oracle), &|x| *x == other).unwrap());
        }
    }

    #[test]
    fn merkle_backend_needs_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = AokBackend::merkle();
        let p = AokProver::new(b, Bits::zeros(64), None);
        let e = aok_challenge(b, 64, &mut rng);
        let z = p.respond(&e).unwrap();
        assert!(matches!(
            aok_verify(b, 64, &p.first_message(), &e, &z, None, &|_| true),
            Err(ProtocolError::OracleDenied)
        ));
    }

    #[test]
    fn circuit_relation_checks_lengths() {
        let rel = RelationSpec::from_circuit("and", sfslab_core::circuits::builders::and2(), 1).unwrap();
        assert_eq!(rel.w_len, 1);
        assert!(rel.holds(&Bits::ones(1), &Bits::ones(1)));
        assert!(!rel.holds(&Bits::ones(1), &Bits::zeros(1)));
        assert!(!rel.holds(&Bits::ones(2), &Bits::ones(1)));
    }
}
