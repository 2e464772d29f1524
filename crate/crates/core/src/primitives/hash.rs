//! Keyed hash family `{0,1}^n -> {0,1}^kappa` built on SHA-256.
//!
//! The key and the shape (n, kappa) prefix every evaluation. Outputs longer
//! than 256 bits concatenate blocks under a 64-bit block counter. The
//! collapsing property of this stand-in is a modeling assumption.

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::Bits;
use crate::circuits::BoolFunction;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HashError {
    #[error("hash input must be {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
}

/// SHA-256 over length-prefixed parts.
pub fn digest(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_be_bytes());
        h.update(p);
    }
    h.finalize().into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashFn {
    pub key: [u8; 16],
    pub n: usize,
    pub kappa: usize,
}

impl HashFn {
    pub fn new(key: [u8; 16], n: usize, kappa: usize) -> Self {
        assert!(kappa > 0, "hash output length must be positive");
        Self { key, n, kappa }
    }

    pub fn sample<R: RngCore + ?Sized>(rng: &mut R, n: usize, kappa: usize) -> Self {
        let mut key = [0u8; 16];
        rng.fill_bytes(&mut key);
        Self::new(key, n, kappa)
    }

    pub fn eval(&self, x: &Bits) -> Result<Bits, HashError> {
        if x.len() != self.n {
            return Err(HashError::Length { expected: self.n, got: x.len() });
        }
        Ok(self.eval_bytes(&x.to_bytes()))
    }

    fn eval_bytes(&self, packed: &[u8]) -> Bits {
        let mut prefix = Sha256::new();
        prefix.update(b"sfslab/hash");
        prefix.update(self.key);
        prefix.update((self.n as u64).to_be_bytes());
        prefix.update((self.kappa as u64).to_be_bytes());
        let blocks = self.kappa.div_ceil(256);
        let mut out = Vec::with_capacity(blocks * 32);
        for ctr in 0..blocks as u64 {
            let mut h = prefix.clone();
            h.update(ctr.to_be_bytes());
            h.update(packed);
            out.extend_from_slice(&h.finalize());
        }
        Bits::from_bytes(&out, self.kappa).expect("enough digest bytes")
    }

    /// Wire form: key ‖ n (u32 BE) ‖ kappa (u32 BE).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = self.key.to_vec();
        v.extend_from_slice(&(self.n as u32).to_be_bytes());
        v.extend_from_slice(&(self.kappa as u32).to_be_bytes());
        v
    }

    pub fn from_bytes(b: &[u8]) -> Option<Self> {
        if b.len() != 24 {
            return None;
        }
        let key: [u8; 16] = b[..16].try_into().ok()?;
        let n = u32::from_be_bytes(b[16..20].try_into().ok()?) as usize;
        let kappa = u32::from_be_bytes(b[20..24].try_into().ok()?) as usize;
        if kappa == 0 {
            return None;
        }
        Some(Self { key, n, kappa })
    }
}

impl BoolFunction for HashFn {
    fn n_inputs(&self) -> usize {
        self.n
    }
    fn n_outputs(&self) -> usize {
        self.kappa
    }
    fn eval_unchecked(&self, x: &Bits) -> Bits {
        self.eval_bytes(&x.to_bytes())
    }
}
