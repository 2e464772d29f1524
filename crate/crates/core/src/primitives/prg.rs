//! Counter-mode generator over SHA-256: block j = SHA256(tag ‖ seed ‖ j).

use sha2::{Digest, Sha256};

use crate::bits::Bits;

pub const MAX_OUTPUT_BITS: u64 = 1 << 32;

/// Expands `seed` to `len` bits. `prg_expand(s, a)` is a prefix of
/// `prg_expand(s, b)` whenever `a <= b`.
pub fn prg_expand(seed: &Bits, len: usize) -> Bits {
    assert!(len as u64 <= MAX_OUTPUT_BITS, "generator output capped at 2^32 bits");
    let mut prefix = Sha256::new();
    prefix.update(b"sfslab/prg");
    prefix.update((seed.len() as u64).to_be_bytes());
    prefix.update(seed.to_bytes());
    let blocks = len.div_ceil(256);
    let mut out = Vec::with_capacity(blocks * 32);
    for ctr in 0..blocks as u64 {
        let mut h = prefix.clone();
        h.update(ctr.to_be_bytes());
        out.extend_from_slice(&h.finalize());
    }
    Bits::from_bytes(&out, len).expect("enough generator bytes")
}
