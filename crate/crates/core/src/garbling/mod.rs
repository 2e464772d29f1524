//! Yao garbling as a decomposable randomized encoding.
//!
//! Point-and-permute, one encrypted table per gate (4 rows for binary gates,
//! 2 for NOT), no free-XOR. Shared coins `r` hold one κ-bit block per input
//! wire; internal wire labels come from the garbler's own coins `r_gcin`,
//! 2κ bits per gate. Labels are κ bits and their last bit is the point bit:
//! the label of value `v` on a wire with permute bit `λ` has point bit
//! `v ⊕ λ`. A row holds `out_label ‖ 0^κ` under a pad keyed by the input
//! labels; the zero tail authenticates decryption.
//!
//! The circuit encoding is a flat bit string: tables in gate order, rows in
//! slot order, then one decode bit (the output wire's `λ`) per output.

mod cipher;
mod package;

use rand::Rng;
use thiserror::Error;

use crate::bits::Bits;
use crate::circuits::{BitAlgebra, Circuit, CircuitBuilder, CircuitError, GateOp, Plain};

pub use cipher::{FeistelCipher, LabelCipher, Sha256Cipher, FEISTEL_DEFAULT_ROUNDS};
pub use package::GarbledPackage;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GarbleError {
    #[error("{what} must be {expected} bits, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("no table row of gate {gate} decrypts under the held labels")]
    NoRowDecrypts { gate: usize },
    #[error("encoding was produced for a different circuit or security parameter")]
    Mismatch,
    #[error("malformed package: {0}")]
    Package(String),
    #[error("the {0} suite cannot be compiled to a circuit")]
    NotCompilable(&'static str),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Sha256,
    Feistel { rounds: usize },
}

impl Suite {
    pub fn feistel() -> Self {
        Suite::Feistel { rounds: FEISTEL_DEFAULT_ROUNDS }
    }

    pub fn tag(&self) -> u8 {
        match self {
            Suite::Sha256 => 1,
            Suite::Feistel { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputEncoding {
    pub labels: Vec<Bits>,
}

impl InputEncoding {
    pub fn to_flat(&self) -> Bits {
        Bits::concat(&self.labels)
    }

    pub fn from_flat(bits: &Bits, kappa: usize) -> Result<Self, GarbleError> {
        if bits.len() % kappa != 0 {
            return Err(GarbleError::Length {
                what: "input encoding",
                expected: bits.len() / kappa * kappa,
                got: bits.len(),
            });
        }
        Ok(Self { labels: (0..bits.len() / kappa).map(|i| bits.slice(i * kappa..(i + 1) * kappa)).collect() })
    }
}

/// A garbled circuit. `bits` is the flat encoding; the circuit itself is
/// public and identified by its fingerprint. The internal coins are never
/// part of the encoding; only their length is recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitEncoding {
    pub kappa: usize,
    pub fingerprint: [u8; 32],
    pub r_gcin_len: usize,
    pub bits: Bits,
}

impl CircuitEncoding {
    pub fn decode_bits(&self, c: &Circuit) -> Bits {
        let n = self.bits.len();
        self.bits.slice(n - c.n_outputs()..n)
    }
}

fn rows(op: GateOp) -> usize {
    if op == GateOp::Not {
        2
    } else {
        4
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Garbler {
    pub kappa: usize,
    pub suite: Suite,
    feistel: Option<FeistelCipher>,
}

impl Garbler {
    pub fn new(kappa: usize, suite: Suite) -> Self {
        assert!(kappa >= 2, "labels need at least two bits");
        let feistel = match suite {
            Suite::Feistel { rounds } => Some(FeistelCipher::new(kappa, rounds)),
            Suite::Sha256 => None,
        };
        Self { kappa, suite, feistel }
    }

    pub fn sha256(kappa: usize) -> Self {
        Self::new(kappa, Suite::Sha256)
    }

    pub fn r_len(&self, c: &Circuit) -> usize {
        c.n_inputs() * self.kappa
    }

    pub fn r_gcin_len(&self, c: &Circuit) -> usize {
        2 * self.kappa * c.gates().len()
    }

    /// Length of the flat circuit encoding.
    pub fn encoding_len(&self, c: &Circuit) -> usize {
        c.gates().iter().map(|g| rows(g.op)).sum::<usize>() * 2 * self.kappa + c.n_outputs()
    }

    fn check(&self, what: &'static str, expected: usize, got: usize) -> Result<(), GarbleError> {
        if expected != got {
            return Err(GarbleError::Length { what, expected, got });
        }
        Ok(())
    }

    fn with_cipher<T>(&self, f: impl FnOnce(&dyn LabelCipher<Plain>) -> T) -> T {
        match &self.feistel {
            Some(fc) => f(fc),
            None => f(&Sha256Cipher { kappa: self.kappa }),
        }
    }

    pub fn garble_input(&self, x: &Bits, r: &Bits) -> Result<InputEncoding, GarbleError> {
        self.check("shared coins", x.len() * self.kappa, r.len())?;
        let k = self.kappa;
        let r = r.to_bools();
        let labels = self.with_cipher(|cipher| {
            (0..x.len())
                .map(|i| {
                    let block = &r[i * k..(i + 1) * k];
                    let l0 = cipher.input_label(&mut Plain, block, false, i);
                    let label = if x.get(i) {
                        let mut l1 = cipher.input_label(&mut Plain, block, true, i);
                        l1[k - 1] = !l0[k - 1];
                        l1
                    } else {
                        l0
                    };
                    Bits::from_bools(&label)
                })
                .collect()
        });
        Ok(InputEncoding { labels })
    }

    pub fn garble_circuit(&self, c: &Circuit, r: &Bits, r_gcin: &Bits) -> Result<CircuitEncoding, GarbleError> {
        self.check("shared coins", self.r_len(c), r.len())?;
        self.check("internal coins", self.r_gcin_len(c), r_gcin.len())?;
        let flat = self.with_cipher(|cipher| garble_in(&mut Plain, cipher, c, &r.to_bools(), &r_gcin.to_bools()));
        Ok(CircuitEncoding {
            kappa: self.kappa,
            fingerprint: c.fingerprint(),
            r_gcin_len: r_gcin.len(),
            bits: Bits::from_bools(&flat),
        })
    }

    /// The suite's generator, used to derive internal coins from a short seed.
    pub fn prg(&self, seed: &Bits, len: usize) -> Bits {
        match &self.feistel {
            Some(fc) => Bits::from_bools(&fc.prg(&mut Plain, &seed.to_bools(), len)),
            None => crate::primitives::prg::prg_expand(seed, len),
        }
    }

    /// `GarbleC(C, r; PRG(s))`.
    pub fn garble_circuit_seeded(&self, c: &Circuit, r: &Bits, s: &Bits) -> Result<CircuitEncoding, GarbleError> {
        let coins = self.prg(s, self.r_gcin_len(c));
        self.garble_circuit(c, r, &coins)
    }

    /// Circuit computing `(r ‖ s) ↦ GarbleC(C, r; PRG(s))` as a flat encoding,
    /// with `|s| = seed_len`. Only the Feistel suite can be compiled.
    pub fn compile_seeded_garbler(&self, c: &Circuit, seed_len: usize) -> Result<Circuit, GarbleError> {
        let fc = self.feistel.as_ref().ok_or(GarbleError::NotCompilable("sha256"))?;
        let r_len = self.r_len(c);
        let mut b = CircuitBuilder::new(r_len + seed_len);
        let ins = b.inputs();
        let coins = fc.prg(&mut b, &ins[r_len..], self.r_gcin_len(c));
        let outs = garble_in(&mut b, fc, c, &ins[..r_len], &coins);
        Ok(b.finish(&outs)?)
    }

    pub fn encoding_from_flat(&self, c: &Circuit, bits: Bits) -> Result<CircuitEncoding, GarbleError> {
        self.check("circuit encoding", self.encoding_len(c), bits.len())?;
        Ok(CircuitEncoding { kappa: self.kappa, fingerprint: c.fingerprint(), r_gcin_len: self.r_gcin_len(c), bits })
    }

    /// Evaluates the garbled circuit on held input labels.
    pub fn degarble(&self, c: &Circuit, ce: &CircuitEncoding, ie: &InputEncoding) -> Result<Bits, GarbleError> {
        if ce.kappa != self.kappa || ce.fingerprint != c.fingerprint() {
            return Err(GarbleError::Mismatch);
        }
        self.check("circuit encoding", self.encoding_len(c), ce.bits.len())?;
        self.check("input labels", c.n_inputs(), ie.labels.len())?;
        if ie.labels.iter().any(|l| l.len() != self.kappa) {
            return Err(GarbleError::Mismatch);
        }
        let k = self.kappa;
        self.with_cipher(|cipher| {
            let mut wires: Vec<Option<Vec<bool>>> = vec![None; c.n_wires()];
            for (i, l) in ie.labels.iter().enumerate() {
                wires[i] = Some(l.to_bools());
            }
            let mut offset = 0;
            for (gi, g) in c.gates().iter().enumerate() {
                let la = wires[g.a].clone().expect("topological order");
                let (slot, pad) = if g.op == GateOp::Not {
                    (la[k - 1] as usize, cipher.row_pad(&mut Plain, &la, None, gi))
                } else {
                    let lb = wires[g.b].clone().expect("topological order");
                    let slot = 2 * la[k - 1] as usize + lb[k - 1] as usize;
                    (slot, cipher.row_pad(&mut Plain, &la, Some(&lb), gi))
                };
                let start = offset + slot * 2 * k;
                let mut row = ce.bits.slice(start..start + 2 * k);
                row.xor_assign(&Bits::from_bools(&pad));
                if !row.slice(k..2 * k).is_zero() {
                    return Err(GarbleError::NoRowDecrypts { gate: gi });
                }
                wires[g.out] = Some(row.slice(0..k).to_bools());
                offset += rows(g.op) * 2 * k;
            }
            let decode = ce.decode_bits(c);
            Ok(c.outputs()
                .iter()
                .enumerate()
                .map(|(j, &w)| wires[w].as_ref().unwrap()[k - 1] ^ decode.get(j))
                .collect())
        })
    }

    /// Counts, for each gate, how many of its rows decrypt under the labels
    /// reachable from `ie` along the evaluation path.
    pub fn decryptable_rows(&self, c: &Circuit, ce: &CircuitEncoding, ie: &InputEncoding) -> Vec<usize> {
        let k = self.kappa;
        self.with_cipher(|cipher| {
            let mut wires: Vec<Option<Vec<bool>>> = vec![None; c.n_wires()];
            for (i, l) in ie.labels.iter().enumerate() {
                wires[i] = Some(l.to_bools());
            }
            let mut offset = 0;
            let mut counts = Vec::with_capacity(c.gates().len());
            for (gi, g) in c.gates().iter().enumerate() {
                let la = wires[g.a].clone().unwrap();
                let pad = if g.op == GateOp::Not {
                    cipher.row_pad(&mut Plain, &la, None, gi)
                } else {
                    let lb = wires[g.b].clone().unwrap();
                    cipher.row_pad(&mut Plain, &la, Some(&lb), gi)
                };
                let pad = Bits::from_bools(&pad);
                let mut hits = 0;
                let mut out = vec![false; k];
                for slot in 0..rows(g.op) {
                    let start = offset + slot * 2 * k;
                    let row = ce.bits.slice(start..start + 2 * k).xor(&pad);
                    if row.slice(k..2 * k).is_zero() {
                        hits += 1;
                        out = row.slice(0..k).to_bools();
                    }
                }
                counts.push(hits);
                wires[g.out] = Some(out);
                offset += rows(g.op) * 2 * k;
            }
            counts
        })
    }

    /// Input-first simulation, first half: labels chosen before the output is known.
    pub fn sim_input_encoding<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> InputEncoding {
        InputEncoding { labels: (0..n).map(|_| Bits::random(rng, self.kappa)).collect() }
    }

    /// Input-first simulation, second half: tables that decode to `y` along the
    /// single active path fixed by `ie`; every other row is uniform.
    pub fn sim_circuit_encoding<R: Rng + ?Sized>(
        &self,
        ie: &InputEncoding,
        y: &Bits,
        c: &Circuit,
        rng: &mut R,
    ) -> Result<CircuitEncoding, GarbleError> {
        self.check("planted output", c.n_outputs(), y.len())?;
        self.check("input labels", c.n_inputs(), ie.labels.len())?;
        let k = self.kappa;
        let flat = self.with_cipher(|cipher| {
            let mut active: Vec<Option<Vec<bool>>> = vec![None; c.n_wires()];
            for (i, l) in ie.labels.iter().enumerate() {
                active[i] = Some(l.to_bools());
            }
            let mut out = Vec::with_capacity(self.encoding_len(c));
            for (gi, g) in c.gates().iter().enumerate() {
                let la = active[g.a].clone().unwrap();
                let (slot, pad) = if g.op == GateOp::Not {
                    (la[k - 1] as usize, cipher.row_pad(&mut Plain, &la, None, gi))
                } else {
                    let lb = active[g.b].clone().unwrap();
                    let slot = 2 * la[k - 1] as usize + lb[k - 1] as usize;
                    (slot, cipher.row_pad(&mut Plain, &la, Some(&lb), gi))
                };
                let label = Bits::random(rng, k).to_bools();
                for s in 0..rows(g.op) {
                    if s == slot {
                        let mut plain = label.clone();
                        plain.extend(std::iter::repeat(false).take(k));
                        out.extend(plain.iter().zip(&pad).map(|(a, b)| a ^ b));
                    } else {
                        out.extend(Bits::random(rng, 2 * k).iter());
                    }
                }
                active[g.out] = Some(label);
            }
            for (j, &w) in c.outputs().iter().enumerate() {
                out.push(active[w].as_ref().unwrap()[k - 1] ^ y.get(j));
            }
            out
        });
        Ok(CircuitEncoding {
            kappa: k,
            fingerprint: c.fingerprint(),
            r_gcin_len: self.r_gcin_len(c),
            bits: Bits::from_bools(&flat),
        })
    }
}

/// Garbling over any bit algebra; returns the flat encoding.
pub fn garble_in<A: BitAlgebra, C: LabelCipher<A> + ?Sized>(
    alg: &mut A,
    cipher: &C,
    c: &Circuit,
    r: &[A::Bit],
    r_gcin: &[A::Bit],
) -> Vec<A::Bit> {
    let k = cipher.kappa();
    assert_eq!(r.len(), c.n_inputs() * k);
    assert_eq!(r_gcin.len(), 2 * k * c.gates().len());

    let mut labels: Vec<Option<[Vec<A::Bit>; 2]>> = vec![None; c.n_wires()];
    for i in 0..c.n_inputs() {
        let block = &r[i * k..(i + 1) * k];
        let l0 = cipher.input_label(alg, block, false, i);
        let mut l1 = cipher.input_label(alg, block, true, i);
        l1[k - 1] = alg.not(&l0[k - 1]);
        labels[i] = Some([l0, l1]);
    }
    for (gi, g) in c.gates().iter().enumerate() {
        let base = 2 * k * gi;
        let l0 = r_gcin[base..base + k].to_vec();
        let mut l1 = r_gcin[base + k..base + 2 * k].to_vec();
        l1[k - 1] = alg.not(&l0[k - 1]);
        labels[g.out] = Some([l0, l1]);
    }

    let zero_tag: Vec<A::Bit> = alg.constants(std::iter::repeat(false).take(k));
    let mut out = Vec::new();
    for (gi, g) in c.gates().iter().enumerate() {
        let [a0, a1] = labels[g.a].clone().unwrap();
        let [o0, o1] = labels[g.out].clone().unwrap();
        let lam_a = a0[k - 1].clone();
        let out_label = |v: bool| if v { &o1 } else { &o0 };
        let seal = |alg: &mut A, la: &[A::Bit], lb: Option<&[A::Bit]>, v: bool| {
            let pad = cipher.row_pad(alg, la, lb, gi);
            let mut plain = out_label(v).clone();
            plain.extend(zero_tag.iter().cloned());
            alg.xor_vec(&plain, &pad)
        };
        if g.op == GateOp::Not {
            let mut r0 = seal(alg, &a0, None, true);
            let mut r1 = seal(alg, &a1, None, false);
            alg.cond_swap(&lam_a, &mut r0, &mut r1);
            out.extend(r0);
            out.extend(r1);
        } else {
            let [b0, b1] = labels[g.b].clone().unwrap();
            let lam_b = b0[k - 1].clone();
            let f = |x: bool, y: bool| g.op.apply(x, y);
            let mut r00 = seal(alg, &a0, Some(&b0), f(false, false));
            let mut r01 = seal(alg, &a0, Some(&b1), f(false, true));
            let mut r10 = seal(alg, &a1, Some(&b0), f(true, false));
            let mut r11 = seal(alg, &a1, Some(&b1), f(true, true));
            // slot (i, j) must hold row (i ⊕ λa, j ⊕ λb)
            alg.cond_swap(&lam_a, &mut r00, &mut r10);
            alg.cond_swap(&lam_a, &mut r01, &mut r11);
            alg.cond_swap(&lam_b, &mut r00, &mut r01);
            alg.cond_swap(&lam_b, &mut r10, &mut r11);
            for row in [r00, r01, r10, r11] {
                out.extend(row);
            }
        }
    }
    for &w in c.outputs() {
        out.push(labels[w].as_ref().unwrap()[0][k - 1].clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::builders;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn roundtrip(g: &Garbler, c: &Circuit, x: &Bits, rng: &mut ChaCha8Rng) -> Bits {
        let r = Bits::random(rng, g.r_len(c));
        let gc = Bits::random(rng, g.r_gcin_len(c));
        let ce = g.garble_circuit(c, &r, &gc).unwrap();
        let ie = g.garble_input(x, &r).unwrap();
        g.degarble(c, &ce, &ie).unwrap()
    }

    #[test]
    fn and_gate_table_shape_and_truth() {
        let g = Garbler::sha256(16);
        let c = builders::and2();
        assert_eq!(g.encoding_len(&c), 4 * 32 + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(roundtrip(&g, &c, &Bits::parse("11").unwrap(), &mut rng).to_string(), "1");
        let x = builders::xor2();
        assert_eq!(roundtrip(&g, &x, &Bits::parse("10").unwrap(), &mut rng).to_string(), "1");
    }

    #[test]
    fn input_encoding_is_per_wire() {
        let g = Garbler::sha256(16);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = Bits::random(&mut rng, 4 * 16);
        let x = Bits::parse("0110").unwrap();
        let a = g.garble_input(&x, &r).unwrap();
        assert_eq!(a, g.garble_input(&x, &r).unwrap());
        for i in 0..4 {
            let mut y = x.clone();
            y.set(i, !y.get(i));
            let b = g.garble_input(&y, &r).unwrap();
            for j in 0..4 {
                assert_eq!(a.labels[j] == b.labels[j], i != j);
            }
        }
    }

    #[test]
    fn garbling_is_deterministic_and_hides_internal_coins() {
        let g = Garbler::sha256(16);
        let c = builders::ripple_adder(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Bits::random(&mut rng, g.r_len(&c));
        let gc = Bits::random(&mut rng, g.r_gcin_len(&c));
        let a = g.garble_circuit(&c, &r, &gc).unwrap();
        assert_eq!(a, g.garble_circuit(&c, &r, &gc).unwrap());
        assert_eq!(a.bits.len(), g.encoding_len(&c));
        assert!(g.garble_circuit(&c, &r, &gc.slice(0..10)).is_err());
    }

    #[test]
    fn feistel_suite_decodes() {
        let g = Garbler::new(16, Suite::feistel());
        let c = builders::less_than(2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for v in 0..16u64 {
            let x = Bits::from_u64(v, 4);
            assert_eq!(roundtrip(&g, &c, &x, &mut rng), c.eval(&x).unwrap());
        }
    }

    #[test]
    fn compiled_garbler_matches_native() {
        let g = Garbler::new(8, Suite::Feistel { rounds: 6 });
        let c = builders::and2();
        let compiled = g.compile_seeded_garbler(&c, 8).unwrap();
        assert_eq!(compiled.n_outputs(), g.encoding_len(&c));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let r = Bits::random(&mut rng, g.r_len(&c));
            let s = Bits::random(&mut rng, 8);
            let native = g.garble_circuit_seeded(&c, &r, &s).unwrap();
            let via_circuit = compiled.eval(&Bits::concat([&r, &s])).unwrap();
            assert_eq!(native.bits, via_circuit);
        }
        assert!(Garbler::sha256(8).compile_seeded_garbler(&c, 8).is_err());
    }

    #[test]
    fn mismatched_labels_fail_to_decrypt() {
        let g = Garbler::sha256(16);
        let c = builders::and2();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = Bits::random(&mut rng, g.r_len(&c));
        let ce = g.garble_circuit(&c, &r, &Bits::random(&mut rng, g.r_gcin_len(&c))).unwrap();
        let other = Bits::random(&mut rng, g.r_len(&c));
        let ie = g.garble_input(&Bits::parse("11").unwrap(), &other).unwrap();
        assert_eq!(g.degarble(&c, &ce, &ie), Err(GarbleError::NoRowDecrypts { gate: 0 }));
    }

    #[test]
    fn simulated_and_gate_decodes_to_planted_value() {
        let g = Garbler::sha256(32);
        let c = builders::and2();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for y in ["0", "1"] {
            let y = Bits::parse(y).unwrap();
            let ie = g.sim_input_encoding(2, &mut rng);
            let ce = g.sim_circuit_encoding(&ie, &y, &c, &mut rng).unwrap();
            assert_eq!(g.degarble(&c, &ce, &ie).unwrap(), y);
            assert_eq!(g.decryptable_rows(&c, &ce, &ie), vec![1]);
        }
    }
}
