//! Naor's bit commitment, applied bitwise.
//!
//! With public string `pp = pp_1 ‖ … ‖ pp_n` (3κ bits each) and sender
//! randomness `r = r_1 ‖ … ‖ r_n` (κ bits each), bit `m_i` commits to
//! `G(r_i)` if `m_i = 0` and `G(r_i) ⊕ pp_i` if `m_i = 1`, where `G` is the
//! generator stretched to 3κ bits.

use rand::RngCore;
use thiserror::Error;

use super::prg::prg_expand;
use crate::bits::Bits;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommitError {
    #[error("{what} must be {expected} bits, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommitParams {
    pub n: usize,
    pub kappa: usize,
}

impl CommitParams {
    pub fn new(n: usize, kappa: usize) -> Self {
        Self { n, kappa }
    }

    pub fn pp_len(&self) -> usize {
        3 * self.n * self.kappa
    }

    pub fn r_len(&self) -> usize {
        self.n * self.kappa
    }

    pub fn sample_pp<R: RngCore + ?Sized>(&self, rng: &mut R) -> Bits {
        Bits::random(rng, self.pp_len())
    }

    pub fn sample_r<R: RngCore + ?Sized>(&self, rng: &mut R) -> Bits {
        Bits::random(rng, self.r_len())
    }

    fn check(&self, m: &Bits, r: &Bits, pp: &Bits) -> Result<(), CommitError> {
        for (what, expected, got) in [
            ("message", self.n, m.len()),
            ("randomness", self.r_len(), r.len()),
            ("public parameter", self.pp_len(), pp.len()),
        ] {
            if expected != got {
                return Err(CommitError::Length { what, expected, got });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Commitment(pub Bits);

pub fn commit(params: &CommitParams, m: &Bits, r: &Bits, pp: &Bits) -> Result<Commitment, CommitError> {
    params.check(m, r, pp)?;
    let k = params.kappa;
    let mut out = Bits::with_capacity(params.pp_len());
    for i in 0..params.n {
        let mut block = prg_expand(&r.slice(i * k..(i + 1) * k), 3 * k);
        if m.get(i) {
            block.xor_assign(&pp.slice(3 * k * i..3 * k * (i + 1)));
        }
        out.extend(&block);
    }
    Ok(Commitment(out))
}

pub fn verify_opening(
    params: &CommitParams,
    c: &Commitment,
    m: &Bits,
    r: &Bits,
    pp: &Bits,
) -> Result<bool, CommitError> {
    if c.0.len() != params.pp_len() {
        return Err(CommitError::Length { what: "commitment", expected: params.pp_len(), got: c.0.len() });
    }
    Ok(commit(params, m, r, pp)? == *c)
}
