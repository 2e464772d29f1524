//! Incompressibility: no compressor to `t < m` bits, however it uses shared
//! coins, lets a decompressor recover a uniform `m`-bit string with
//! probability above `2^(t-m)`. Strings from a short generator are the
//! exception, which is what separates generator outputs from uniform ones.
//!
//! This demonstrates the counting argument and the generator-switch step on
//! concrete pairs. It is not a checker for arbitrary protocols.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use thiserror::Error;

use crate::bits::Bits;
use crate::primitives::prg::prg_expand;

/// Largest `m` for which the exhaustive optimum is computed.
pub const MAX_EXHAUSTIVE_M: usize = 10;
/// Largest `m` for which codeword classes are enumerated.
pub const MAX_CLASS_M: usize = 20;
/// Cap on the number of decompressor tables searched explicitly.
pub const MAX_TABLE_SEARCH: u128 = 1 << 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImpossibilityError {
    #[error("m = {m} exceeds the enumeration cap {cap}")]
    TooLarge { m: usize, cap: usize },
}

pub trait CompressorPair: Sync {
    fn name(&self) -> String;
    fn t(&self) -> usize;
    fn m(&self) -> usize;
    fn coin_len(&self) -> usize {
        0
    }
    fn compress(&self, u: &Bits, coins: &Bits) -> Bits;
    fn decompress(&self, c: &Bits, coins: &Bits) -> Bits;
}

/// Keeps everything; only meaningful with `t = m`.
pub struct IdentityPair {
    pub m: usize,
}

impl CompressorPair for IdentityPair {
    fn name(&self) -> String {
        "identity".into()
    }
    fn t(&self) -> usize {
        self.m
    }
    fn m(&self) -> usize {
        self.m
    }
    fn compress(&self, u: &Bits, _: &Bits) -> Bits {
        u.clone()
    }
    fn decompress(&self, c: &Bits, _: &Bits) -> Bits {
        c.clone()
    }
}

/// Keeps the first `t` bits and pads with zeros.
pub struct TruncatePad {
    pub t: usize,
    pub m: usize,
}

impl CompressorPair for TruncatePad {
    fn name(&self) -> String {
        "truncate-pad".into()
    }
    fn t(&self) -> usize {
        self.t
    }
    fn m(&self) -> usize {
        self.m
    }
    fn compress(&self, u: &Bits, _: &Bits) -> Bits {
        u.slice(0..self.t)
    }
    fn decompress(&self, c: &Bits, _: &Bits) -> Bits {
        Bits::concat([c, &Bits::zeros(self.m - self.t)])
    }
}

/// Inverts the generator `prg_expand(·, m)` on `t`-bit seeds by table
/// lookup, so every generator output compresses to its seed. Anything off
/// the image is truncated.
pub struct PrgInverter {
    pub t: usize,
    pub m: usize,
    table: HashMap<Bits, Bits>,
}

impl PrgInverter {
    pub fn new(t: usize, m: usize) -> Self {
        assert!(t <= 20, "seed table too large");
        let table = (0..1u64 << t)
            .map(|v| {
                let s = Bits::from_u64(v, t);
                (prg_expand(&s, m), s)
            })
            .collect();
        Self { t, m, table }
    }
}

impl CompressorPair for PrgInverter {
    fn name(&self) -> String {
        "prg-inverter".into()
    }
    fn t(&self) -> usize {
        self.t
    }
    fn m(&self) -> usize {
        self.m
    }
    fn compress(&self, u: &Bits, _: &Bits) -> Bits {
        self.table.get(u).cloned().unwrap_or_else(|| u.slice(0..self.t))
    }
    fn decompress(&self, c: &Bits, _: &Bits) -> Bits {
        prg_expand(c, self.m)
    }
}

/// Uses the shared coins as a one-time mask before truncating.
pub struct MaskedCoins {
    pub t: usize,
    pub m: usize,
}

impl CompressorPair for MaskedCoins {
    fn name(&self) -> String {
        "masked-coins".into()
    }
    fn t(&self) -> usize {
        self.t
    }
    fn m(&self) -> usize {
        self.m
    }
    fn coin_len(&self) -> usize {
        self.m
    }
    fn compress(&self, u: &Bits, coins: &Bits) -> Bits {
        u.xor(coins).slice(0..self.t)
    }
    fn decompress(&self, c: &Bits, coins: &Bits) -> Bits {
        Bits::concat([c, &Bits::zeros(self.m - self.t)]).xor(coins)
    }
}

/// The pairs shipped with the experiment at a given `(t, m)`.
pub fn shipped_pairs(t: usize, m: usize) -> Vec<Box<dyn CompressorPair>> {
    vec![Box::new(TruncatePad { t, m }), Box::new(PrgInverter::new(t, m)), Box::new(MaskedCoins { t, m })]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSource {
    Uniform,
    /// `prg_expand(x, m)` for uniform `x` of the given length.
    PrgImage {
        seed_len: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub pair: String,
    pub t: usize,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
}

impl ExperimentReport {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// The counting bound `2^(t-m)`, capped at 1.
    pub fn bound(&self) -> f64 {
        2f64.powi(self.t as i32 - self.m as i32).min(1.0)
    }

    /// Standard deviation of the empirical rate if the true rate sat at the bound.
    pub fn sigma(&self) -> f64 {
        let p = self.bound();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn within_bound(&self) -> bool {
        self.rate() <= self.bound() + 3.0 * self.sigma()
    }
}

/// Fraction of trials with `decompress(compress(u, ρ), ρ) = u` over fresh
/// inputs `u` and coins `ρ`.
pub fn run_incompressibility_experiment<R: Rng + ?Sized>(
    pair: &dyn CompressorPair,
    source: InputSource,
    trials: usize,
    rng: &mut R,
) -> ExperimentReport {
    let m = pair.m();
    let mut successes = 0;
    for _ in 0..trials {
        let u = match source {
            InputSource::Uniform => Bits::random(rng, m),
            InputSource::PrgImage { seed_len } => prg_expand(&Bits::random(rng, seed_len), m),
        };
        let coins = Bits::random(rng, pair.coin_len());
        let c = pair.compress(&u, &coins);
        debug_assert_eq!(c.len(), pair.t());
        if pair.decompress(&c, &coins) == u {
            successes += 1;
        }
    }
    ExperimentReport { pair: pair.name(), t: pair.t(), m, trials, successes }
}

/// Best success any decompressor can reach against a fixed deterministic
/// compressor on uniform inputs: the number of distinct codewords over `2^m`.
pub fn optimal_success(compress: &dyn Fn(&Bits) -> Bits, m: usize) -> Result<f64, ImpossibilityError> {
    if m > MAX_CLASS_M {
        return Err(ImpossibilityError::TooLarge { m, cap: MAX_CLASS_M });
    }
    let classes: HashSet<Bits> = (0..1u64 << m).map(|v| compress(&Bits::from_u64(v, m))).collect();
    Ok(classes.len() as f64 / (1u64 << m) as f64)
}

/// Same optimum, found by searching decompressor tables. When the table
/// space is small the search is literal (every map from codewords to
/// strings); otherwise each codeword is decoded to a most frequent preimage,
/// which is optimal codeword by codeword.
pub fn optimal_decompressor_exhaustive(
    compress: &dyn Fn(&Bits) -> Bits,
    t: usize,
    m: usize,
) -> Result<f64, ImpossibilityError> {
    if m > MAX_EXHAUSTIVE_M {
        return Err(ImpossibilityError::TooLarge { m, cap: MAX_EXHAUSTIVE_M });
    }
    let n = 1usize << m;
    let codes: Vec<usize> = (0..n)
        .map(|v| {
            let c = compress(&Bits::from_u64(v as u64, m));
            assert_eq!(c.len(), t, "compressor output length");
            c.to_u64() as usize
        })
        .collect();
    let n_codes = 1usize << t;
    let space = (n as u128).checked_pow(n_codes as u32);
    let best = match space {
        Some(s) if s <= MAX_TABLE_SEARCH => {
            let mut table = vec![0usize; n_codes];
            let mut best = 0;
            loop {
                let hits = (0..n).filter(|&u| table[codes[u]] == u).count();
                best = best.max(hits);
                // next table in mixed radix
                let mut i = 0;
                while i < n_codes {
                    table[i] += 1;
                    if table[i] < n {
                        break;
                    }
                    table[i] = 0;
                    i += 1;
                }
                if i == n_codes {
                    break;
                }
            }
            best
        }
        _ => {
            // each preimage is a single string, so every nonempty class contributes 1
            let mut seen = vec![false; n_codes];
            codes.iter().filter(|&&c| !std::mem::replace(&mut seen[c], true)).count()
        }
    };
    Ok(best as f64 / n as f64)
}
