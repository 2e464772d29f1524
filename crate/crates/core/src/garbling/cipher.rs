//! Label ciphers: how input labels are derived and how table rows are padded.
//!
//! `Sha256` is the default: labels are `prg_expand(block ‖ bit, κ)` and a row
//! pad is `prg_expand(label_a ‖ label_b ‖ gate, 2κ)`. It only runs natively.
//!
//! `Feistel` builds the same two functions from a fixed-key Feistel
//! permutation on 2κ bits with an AND/XOR round function, so that garbling
//! can itself be expressed as a circuit (see
//! [`super::Garbler::compile_seeded_garbler`]). It is a stand-in with no
//! claimed security margin.

use crate::bits::Bits;
use crate::circuits::{BitAlgebra, Plain};
use crate::primitives::hash::digest;
use crate::primitives::prg::prg_expand;

pub trait LabelCipher<A: BitAlgebra> {
    fn kappa(&self) -> usize;

    /// κ-bit label of an input wire from its coin block and value bit.
    fn input_label(&self, alg: &mut A, block: &[A::Bit], bit: bool, wire: usize) -> Vec<A::Bit>;

    /// 2κ-bit pad for the row keyed by `la` (and `lb` for binary gates).
    fn row_pad(&self, alg: &mut A, la: &[A::Bit], lb: Option<&[A::Bit]>, gate: usize) -> Vec<A::Bit>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sha256Cipher {
    pub kappa: usize,
}

impl LabelCipher<Plain> for Sha256Cipher {
    fn kappa(&self) -> usize {
        self.kappa
    }

    fn input_label(&self, _: &mut Plain, block: &[bool], bit: bool, _wire: usize) -> Vec<bool> {
        let mut seed = Bits::from_bools(block);
        seed.push(bit);
        prg_expand(&seed, self.kappa).to_bools()
    }

    fn row_pad(&self, _: &mut Plain, la: &[bool], lb: Option<&[bool]>, gate: usize) -> Vec<bool> {
        let mut seed = Bits::from_bools(la);
        if let Some(lb) = lb {
            seed.extend(&Bits::from_bools(lb));
        }
        seed.extend(&Bits::from_u64(gate as u64, 64));
        prg_expand(&seed, 2 * self.kappa).to_bools()
    }
}

pub const FEISTEL_DEFAULT_ROUNDS: usize = 24;

const DOMAIN_LABEL: u8 = 1;
const DOMAIN_ROW: u8 = 2;
const DOMAIN_PRG: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeistelCipher {
    kappa: usize,
    rounds: usize,
    round_consts: Vec<Vec<bool>>,
}

fn const_bits(parts: &[&[u8]], len: usize) -> Vec<bool> {
    let seed = Bits::from_bytes(&digest(parts), 256).expect("32-byte digest");
    prg_expand(&seed, len).to_bools()
}

impl FeistelCipher {
    pub fn new(kappa: usize, rounds: usize) -> Self {
        assert!(kappa >= 8, "the Feistel suite needs labels of at least 8 bits");
        let round_consts = (0..rounds)
            .map(|i| const_bits(&[b"feistel-round", &(kappa as u64).to_be_bytes(), &(i as u64).to_be_bytes()], kappa))
            .collect();
        Self { kappa, rounds, round_consts }
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn round_fn<A: BitAlgebra>(&self, alg: &mut A, x: &[A::Bit]) -> Vec<A::Bit> {
        let k = self.kappa;
        let rot = |s: usize| -> Vec<A::Bit> { (0..k).map(|i| x[(i + s) % k].clone()).collect() };
        let (r1, r5, r2) = (rot(1), rot(5), rot(2));
        let t = alg.and_vec(&r1, &r5);
        alg.xor_vec(&t, &r2)
    }

    /// The fixed permutation on 2κ bits.
    pub fn permute<A: BitAlgebra>(&self, alg: &mut A, state: &[A::Bit]) -> Vec<A::Bit> {
        let k = self.kappa;
        assert_eq!(state.len(), 2 * k);
        let mut l = state[..k].to_vec();
        let mut r = state[k..].to_vec();
        for c in &self.round_consts {
            let f = self.round_fn(alg, &r);
            let cs = alg.constants(c.iter().copied());
            let f = alg.xor_vec(&f, &cs);
            let nr = alg.xor_vec(&l, &f);
            l = r;
            r = nr;
        }
        l.extend(r);
        l
    }

    /// Sponge-like PRF: absorb 2κ-bit blocks with `s ← π(s ⊕ b) ⊕ s ⊕ b`,
    /// then squeeze block j as `π(s ⊕ c_j) ⊕ s`. The IV binds the domain,
    /// tweak and input length.
    pub fn prf<A: BitAlgebra>(
        &self,
        alg: &mut A,
        domain: u8,
        tweak: u64,
        input: &[A::Bit],
        out_len: usize,
    ) -> Vec<A::Bit> {
        let w = 2 * self.kappa;
        let iv = const_bits(
            &[
                b"feistel-iv",
                &(self.kappa as u64).to_be_bytes(),
                &[domain],
                &tweak.to_be_bytes(),
                &(input.len() as u64).to_be_bytes(),
            ],
            w,
        );
        let mut state = alg.constants(iv);
        for chunk in input.chunks(w) {
            let mut block = chunk.to_vec();
            while block.len() < w {
                block.push(alg.constant(false));
            }
            let t = alg.xor_vec(&state, &block);
            let p = self.permute(alg, &t);
            state = alg.xor_vec(&p, &t);
        }
        let mut out = Vec::with_capacity(out_len.div_ceil(w) * w);
        for j in 0..out_len.div_ceil(w) {
            let c = const_bits(&[b"feistel-squeeze", &(self.kappa as u64).to_be_bytes(), &(j as u64).to_be_bytes()], w);
            let cs = alg.constants(c);
            let t = alg.xor_vec(&state, &cs);
            let p = self.permute(alg, &t);
            out.extend(alg.xor_vec(&p, &state));
        }
        out.truncate(out_len);
        out
    }

    /// Generator used for the garbler's internal coins under this suite.
    pub fn prg<A: BitAlgebra>(&self, alg: &mut A, seed: &[A::Bit], len: usize) -> Vec<A::Bit> {
        self.prf(alg, DOMAIN_PRG, 0, seed, len)
    }
}

impl<A: BitAlgebra> LabelCipher<A> for FeistelCipher {
    fn kappa(&self) -> usize {
        self.kappa
    }

    fn input_label(&self, alg: &mut A, block: &[A::Bit], bit: bool, wire: usize) -> Vec<A::Bit> {
        self.prf(alg, DOMAIN_LABEL, 2 * wire as u64 + bit as u64, block, self.kappa)
    }

    fn row_pad(&self, alg: &mut A, la: &[A::Bit], lb: Option<&[A::Bit]>, gate: usize) -> Vec<A::Bit> {
        let mut input = la.to_vec();
        if let Some(lb) = lb {
            input.extend_from_slice(lb);
        }
        self.prf(alg, DOMAIN_ROW, gate as u64, &input, 2 * self.kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::CircuitBuilder;
    use std::collections::HashSet;

    #[test]
    fn permutation_is_injective_on_small_domain() {
        let c = FeistelCipher::new(8, 12);
        let mut seen = HashSet::new();
        for v in 0..(1u64 << 16) {
            let x = Bits::from_u64(v, 16).to_bools();
            assert!(seen.insert(c.permute(&mut Plain, &x)));
        }
    }

    #[test]
    fn prf_compiles_to_matching_circuit() {
        let c = FeistelCipher::new(8, 8);
        let mut b = CircuitBuilder::new(24);
        let ins = b.inputs();
        let outs = c.prf(&mut b, 9, 5, &ins, 40);
        let circ = b.finish(&outs).unwrap();
        for v in [0u64, 1, 0xabcdef, 0xffffff] {
            let x = Bits::from_u64(v, 24);
            let native = c.prf(&mut Plain, 9, 5, &x.to_bools(), 40);
            assert_eq!(circ.eval(&x).unwrap(), Bits::from_bools(&native));
        }
    }

    #[test]
    fn prf_separates_domains_and_tweaks() {
        let c = FeistelCipher::new(16, 24);
        let x = vec![true; 32];
        let a = c.prf(&mut Plain, 1, 0, &x, 32);
        assert_ne!(a, c.prf(&mut Plain, 2, 0, &x, 32));
        assert_ne!(a, c.prf(&mut Plain, 1, 1, &x, 32));
        assert_eq!(a, c.prf(&mut Plain, 1, 0, &x, 32));
    }

    #[test]
    fn prf_output_is_balanced() {
        let c = FeistelCipher::new(16, 24);
        let out = c.prg(&mut Plain, &Bits::from_u64(0x1234, 16).to_bools(), 100_000);
        let ones = out.iter().filter(|b| **b).count() as f64 / 1e5;
        assert!((ones - 0.5).abs() < 0.01, "ones fraction {ones}");
    }
}
