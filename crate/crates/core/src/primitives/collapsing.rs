//! The collapsing game for a hash function, played on sparse states.
//!
//! The adversary prepares a state over a register `X` plus side registers.
//! The challenger evaluates `h` into a fresh register and measures the digest
//! (Eval). In the Collapse world it additionally measures `X` in the
//! computational basis. The adversary then outputs a bit; the game reports
//! the probability of output 0 in each world.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::hash::HashFn;
use crate::bits::Bits;
use crate::qsim::{QsimError, SparseState};
use crate::seed::{derive_indexed, Seed};

pub const DIGEST_REGISTER: &str = "digest";

pub trait CollapsingAdversary: Sync {
    /// Prepares the state and names the register the hash is applied to.
    fn prepare(&self, h: &HashFn, rng: &mut ChaCha20Rng) -> Result<(SparseState, String), QsimError>;

    /// Distinguishing measurement on the post-challenge state.
    fn distinguish(&self, state: SparseState, digest: &Bits, rng: &mut ChaCha20Rng) -> Result<bool, QsimError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapsingReport {
    pub trials: usize,
    pub p_eval: f64,
    pub p_collapse: f64,
}

impl CollapsingReport {
    pub fn gap(&self) -> f64 {
        (self.p_eval - self.p_collapse).abs()
    }
}

fn play(h: &HashFn, adv: &dyn CollapsingAdversary, collapse: bool, seed: &Seed) -> Result<bool, QsimError> {
    let mut rng = ChaCha20Rng::from_seed(*seed);
    let (mut state, x) = adv.prepare(h, &mut rng)?;
    state.append_register(DIGEST_REGISTER, h.kappa)?;
    state.apply_classical_oracle(h, &[x.as_str()], DIGEST_REGISTER)?;
    let (digest, mut state) = state.measure_computational(&[DIGEST_REGISTER], &mut rng)?;
    if collapse {
        state = state.measure_computational(&[x.as_str()], &mut rng)?.1;
    }
    adv.distinguish(state, &digest, &mut rng)
}

/// Plays both worlds on the same per-trial seed, so a collapse that changes
/// nothing yields identical runs.
pub fn collapsing_game(
    h: &HashFn,
    adv: &dyn CollapsingAdversary,
    trials: usize,
    seed: &Seed,
) -> Result<CollapsingReport, QsimError> {
    let mut zeros = [0usize; 2];
    for t in 0..trials {
        let s = derive_indexed(seed, "collapsing-trial", t as u64);
        for (world, collapse) in [false, true].into_iter().enumerate() {
            if !play(h, adv, collapse, &s)? {
                zeros[world] += 1;
            }
        }
    }
    Ok(CollapsingReport {
        trials,
        p_eval: zeros[0] as f64 / trials as f64,
        p_collapse: zeros[1] as f64 / trials as f64,
    })
}

/// Superposes two fixed preimages and tests their relative phase with a
/// Hadamard measurement: outputs `d·(x0 ⊕ x1)`.
pub struct PairAdversary {
    pub x0: Bits,
    pub x1: Bits,
}

impl CollapsingAdversary for PairAdversary {
    fn prepare(&self, h: &HashFn, _rng: &mut ChaCha20Rng) -> Result<(SparseState, String), QsimError> {
        let layout = crate::qsim::RegisterLayout::new(&[("x", h.n)])?;
        let s = if self.x0 == self.x1 {
            SparseState::basis_state(layout, self.x0.clone())?
        } else {
            SparseState::make_branch_pair(layout, self.x0.clone(), self.x1.clone(), false, false)?
        };
        Ok((s, "x".into()))
    }

    fn distinguish(&self, state: SparseState, _digest: &Bits, rng: &mut ChaCha20Rng) -> Result<bool, QsimError> {
        let (d, _) = state.measure_hadamard(&["x"], rng)?;
        Ok(d.dot(&self.x0.xor(&self.x1)))
    }
}

/// Finds two distinct inputs with equal digests by exhaustive search over
/// the first `2^search_bits` inputs.
pub fn find_collision(h: &HashFn, search_bits: usize) -> Option<(Bits, Bits)> {
    let mut seen = std::collections::HashMap::new();
    for v in 0..(1u64 << search_bits) {
        let mut x = Bits::zeros(h.n - search_bits);
        x.extend(&Bits::from_u64(v, search_bits));
        let y = h.eval(&x).ok()?;
        if let Some(prev) = seen.insert(y, x.clone()) {
            return Some((prev, x));
        }
    }
    None
}
