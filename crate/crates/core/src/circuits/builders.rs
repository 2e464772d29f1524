//! Small circuits used as protocol functions and as the test corpus.
//! Multi-bit integers are big-endian: the first wire is the most significant.

use super::{BitAlgebra, Circuit, CircuitBuilder, Wire};

fn build(n_inputs: usize, body: impl FnOnce(&mut CircuitBuilder, &[Wire]) -> Vec<Wire>) -> Circuit {
    let mut b = CircuitBuilder::new(n_inputs);
    let ins = b.inputs();
    let outs = body(&mut b, &ins);
    b.finish(&outs).expect("builder circuits are well formed")
}

pub fn and2() -> Circuit {
    build(2, |b, x| vec![b.and(&x[0], &x[1])])
}

pub fn xor2() -> Circuit {
    build(2, |b, x| vec![b.xor(&x[0], &x[1])])
}

pub fn or2() -> Circuit {
    build(2, |b, x| vec![b.or(&x[0], &x[1])])
}

pub fn not1() -> Circuit {
    build(1, |b, x| vec![b.not(&x[0])])
}

pub fn identity(n: usize) -> Circuit {
    build(n, |_, x| x.to_vec())
}

pub fn parity(n: usize) -> Circuit {
    build(n, |b, x| {
        let mut acc = x[0];
        for w in &x[1..] {
            acc = b.xor(&acc, w);
        }
        vec![acc]
    })
}

/// `s ? b : a` over inputs (s, a, b).
pub fn mux() -> Circuit {
    build(3, |b, x| {
        let d = b.xor(&x[1], &x[2]);
        let t = b.and(&x[0], &d);
        vec![b.xor(&x[1], &t)]
    })
}

/// Adds two `w`-bit numbers; inputs a‖b, output the `w+1`-bit sum.
pub fn ripple_adder(w: usize) -> Circuit {
    build(2 * w, |b, x| add_in(b, &x[..w], &x[w..]))
}

pub fn add_in<A: BitAlgebra>(alg: &mut A, a: &[A::Bit], b: &[A::Bit]) -> Vec<A::Bit> {
    assert_eq!(a.len(), b.len());
    let w = a.len();
    let mut carry = alg.constant(false);
    let mut sum = vec![carry.clone(); w + 1];
    for i in (0..w).rev() {
        let t = alg.xor(&a[i], &b[i]);
        sum[i + 1] = alg.xor(&t, &carry);
        let g = alg.and(&a[i], &b[i]);
        let p = alg.and(&t, &carry);
        carry = alg.or(&g, &p);
    }
    sum[0] = carry;
    sum
}

/// `a < b` for two `w`-bit numbers; inputs a‖b.
pub fn less_than(w: usize) -> Circuit {
    build(2 * w, |b, x| vec![less_than_in(b, &x[..w], &x[w..])])
}

pub fn less_than_in<A: BitAlgebra>(alg: &mut A, a: &[A::Bit], b: &[A::Bit]) -> A::Bit {
    // Scan from the most significant bit: lt |= eq & !a_i & b_i; eq &= !(a_i ^ b_i)
    let mut lt = alg.constant(false);
    let mut eq = alg.constant(true);
    for (ai, bi) in a.iter().zip(b) {
        let na = alg.not(ai);
        let here = alg.and(&na, bi);
        let step = alg.and(&eq, &here);
        lt = alg.or(&lt, &step);
        let d = alg.xor(ai, bi);
        let same = alg.not(&d);
        eq = alg.and(&eq, &same);
    }
    lt
}

/// Equality of two `w`-bit strings; inputs a‖b.
pub fn equality(w: usize) -> Circuit {
    build(2 * w, |b, x| {
        let mut eq = b.constant(true);
        for i in 0..w {
            let d = b.xor(&x[i], &x[w + i]);
            let s = b.not(&d);
            eq = b.and(&eq, &s);
        }
        vec![eq]
    })
}

/// Multiplies two `w`-bit numbers into a `2w`-bit product; inputs a‖b.
pub fn multiplier(w: usize) -> Circuit {
    build(2 * w, |alg, x| {
        let (a, b) = (&x[..w], &x[w..]);
        let zero = alg.constant(false);
        let mut acc = vec![zero; 2 * w];
        // b_j has weight 2^(w-1-j); shifted partial product a*b_j.
        for j in 0..w {
            let shift = w - 1 - j;
            let mut partial = vec![zero; 2 * w];
            for i in 0..w {
                let pos = 2 * w - 1 - ((w - 1 - i) + shift);
                partial[pos] = alg.and(&a[i], &b[j]);
            }
            let s = add_in(alg, &acc, &partial);
            acc = s[1..].to_vec();
        }
        acc
    })
}

/// A toy length-doubling generator: `n` seed bits to `2n` output bits
/// through a few rounds of an AND/XOR mixing network. Not cryptographic;
/// it exists so that a generator can be exercised as a circuit.
pub fn toy_prg(n: usize) -> Circuit {
    build(n, |alg, x| toy_prg_in(alg, x))
}

pub fn toy_prg_in<A: BitAlgebra>(alg: &mut A, seed: &[A::Bit]) -> Vec<A::Bit> {
    let n = seed.len();
    let mut state = seed.to_vec();
    let mut out = Vec::with_capacity(2 * n);
    for round in 0..2 {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let a = &state[(i + 1) % n];
            let b = &state[(i + 2 + round) % n];
            let t = alg.and(a, b);
            let u = alg.xor(&state[i], &t);
            let c = alg.constant((i + round) % 3 == 0);
            next.push(alg.xor(&u, &c));
        }
        out.extend(next.iter().cloned());
        state = next;
    }
    out
}
