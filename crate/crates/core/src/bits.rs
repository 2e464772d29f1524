//! Packed bit strings.
//!
//! Strings are indexed left to right from 0 and pack MSB-first: bit 0 is the
//! most significant bit of byte 0. Every wire format in this workspace uses
//! that convention.

use std::fmt;
use std::ops::Range;

use bitvec::prelude::*;
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
    #[error("invalid hex string: {0}")]
    InvalidHex(String),
    #[error("buffer of {have} bytes cannot hold {want} bits")]
    ShortBuffer { have: usize, want: usize },
}

/// An owned, MSB-first bit string.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(BitVec<u8, Msb0>);

impl Bits {
    pub fn new() -> Self {
        Self(BitVec::new())
    }

    pub fn zeros(len: usize) -> Self {
        Self(BitVec::repeat(false, len))
    }

    pub fn ones(len: usize) -> Self {
        Self(BitVec::repeat(true, len))
    }

    pub fn with_capacity(len: usize) -> Self {
        Self(BitVec::with_capacity(len))
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R, len: usize) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        Self::from_bytes(&bytes, len).expect("buffer sized for len")
    }

    /// Unpacks the first `len` bits of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        if bytes.len() * 8 < len {
            return Err(BitsError::ShortBuffer { have: bytes.len(), want: len });
        }
        let mut bv = BitVec::<u8, Msb0>::from_slice(&bytes[..len.div_ceil(8)]);
        bv.truncate(len);
        Ok(Self(bv))
    }

    /// Packs into `ceil(len/8)` bytes with zeroed padding bits.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bv = self.0.clone();
        bv.force_align();
        bv.set_uninitialized(false);
        bv.into_vec()
    }

    /// `len` bits of the big-endian representation of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        (0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect()
    }

    /// Big-endian integer value; `len` must be at most 64.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64);
        self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        bits.iter().copied().collect()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// Parses a string of '0'/'1' characters; '_' and whitespace are ignored.
    pub fn parse(s: &str) -> Result<Self, BitsError> {
        let mut out = Bits::new();
        for ch in s.chars() {
            match ch {
                '0' => out.push(false),
                '1' => out.push(true),
                '_' | ' ' => {}
                other => return Err(BitsError::InvalidChar(other)),
            }
        }
        Ok(out)
    }

    /// Parses hex digits, four bits per digit; `len` truncates from the left-aligned value.
    pub fn from_hex(s: &str, len: Option<usize>) -> Result<Self, BitsError> {
        let digits = s.trim().trim_start_matches("0x");
        let mut out = Bits::with_capacity(digits.len() * 4);
        for ch in digits.chars() {
            let v = ch.to_digit(16).ok_or_else(|| BitsError::InvalidHex(s.to_string()))?;
            out.extend(&Bits::from_u64(v as u64, 4));
        }
        if let Some(len) = len {
            if len > out.len() {
                return Err(BitsError::ShortBuffer { have: digits.len().div_ceil(2), want: len });
            }
            out.0.truncate(len);
        }
        Ok(out)
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len().div_ceil(4));
        for chunk in self.0.chunks(4) {
            let mut v = 0u32;
            for (i, b) in chunk.iter().enumerate() {
                if *b {
                    v |= 1 << (3 - i);
                }
            }
            s.push(char::from_digit(v, 16).unwrap());
        }
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0.set(i, v);
    }

    pub fn push(&mut self, v: bool) {
        self.0.push(v);
    }

    pub fn extend(&mut self, other: &Bits) {
        self.0.extend_from_bitslice(&other.0);
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Bits>) -> Bits {
        let mut out = Bits::new();
        for p in parts {
            out.extend(p);
        }
        out
    }

    pub fn slice(&self, range: Range<usize>) -> Bits {
        let mut bv = self.0[range].to_bitvec();
        bv.force_align();
        Bits(bv)
    }

    /// Overwrites `self[offset..offset + src.len()]` with `src`.
    pub fn write_at(&mut self, offset: usize, src: &Bits) {
        self.0[offset..offset + src.len()].copy_from_bitslice(&src.0);
    }

    /// XORs `src` into `self[offset..offset + src.len()]`.
    pub fn xor_at(&mut self, offset: usize, src: &Bits) {
        *(&mut self.0[offset..offset + src.len()]) ^= &src.0;
    }

    /// Range-restricted XOR; panics on length mismatch.
    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.len(), other.len(), "xor of unequal lengths");
        let mut out = self.clone();
        out.0 ^= &other.0;
        out
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len(), other.len(), "xor of unequal lengths");
        self.0 ^= &other.0;
    }

    /// Inner product over GF(2): XOR over AND of aligned bits.
    pub fn dot(&self, other: &Bits) -> bool {
        assert_eq!(self.len(), other.len(), "dot of unequal lengths");
        let mut and = self.0.clone();
        and &= &other.0;
        and.count_ones() % 2 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.0.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.0.not_any()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().by_vals()
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Bits(iter.into_iter().collect())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 128 {
            write!(f, "Bits({self})")
        } else {
            write!(f, "Bits(len={}, hex={}..)", self.len(), &self.to_hex()[..32])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn msb_first_packing() {
        let b = Bits::parse("1000_0000_1").unwrap();
        assert_eq!(b.to_bytes(), vec![0x80, 0x80]);
        assert_eq!(Bits::from_bytes(&[0x80, 0x80], 9).unwrap(), b);
    }

    #[test]
    fn unaligned_slices_pack_from_bit_zero() {
        let b = Bits::parse("0110_1101_1").unwrap();
        let s = b.slice(3..9);
        assert_eq!(s, Bits::parse("011011").unwrap());
        assert_eq!(s.to_bytes(), vec![0b0110_1100]);
        assert_eq!(Bits::from_bytes(&s.to_bytes(), 6).unwrap(), s);
    }

    #[test]
    fn dot_is_parity_of_and() {
        let a = Bits::parse("1101").unwrap();
        let b = Bits::parse("1011").unwrap();
        // AND = 1001 -> two ones
        assert!(!a.dot(&b));
        assert!(a.dot(&Bits::parse("1000").unwrap()));
    }

    #[test]
    fn hex_roundtrip_and_truncation() {
        let b = Bits::from_hex("a5", None).unwrap();
        assert_eq!(b.to_string(), "10100101");
        assert_eq!(b.to_hex(), "a5");
        assert_eq!(Bits::from_hex("a", Some(2)).unwrap().to_string(), "10");
        assert!(Bits::from_hex("zz", None).is_err());
    }

    #[test]
    fn short_buffer_rejected() {
        assert!(Bits::from_bytes(&[0xff], 9).is_err());
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(bytes in proptest::collection::vec(any::<u8>(), 0..20), cut in 0usize..8) {
            let len = (bytes.len() * 8).saturating_sub(cut);
            let b = Bits::from_bytes(&bytes, len).unwrap();
            prop_assert_eq!(Bits::from_bytes(&b.to_bytes(), len).unwrap(), b);
        }

        #[test]
        fn xor_at_matches_slice_xor(a in proptest::collection::vec(any::<bool>(), 1..80), off in 0usize..40) {
            let base = Bits::from_bools(&a);
            let off = off % base.len();
            let src = Bits::from_bools(&a[..base.len() - off]);
            let mut patched = base.clone();
            patched.xor_at(off, &src);
            let expect: Bits = (0..base.len())
                .map(|i| if i >= off { base.get(i) ^ src.get(i - off) } else { base.get(i) })
                .collect();
            prop_assert_eq!(patched, expect);
        }
    }
}
