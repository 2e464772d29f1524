//! Exact simulation of states that are sparse in the computational basis:
//! `k` distinct basis strings with a common magnitude `1/sqrt(k)` and real
//! signs. Every state the protocols produce has this form, so the simulator
//! is exact at any register width.
//!
//! Measuring registers in the Hadamard basis consumes them: the post-state
//! layout drops the measured registers. Computational-basis measurement keeps
//! them, since they are left in a known basis state.

mod codec;
pub mod dense;
mod layout;

use rand::Rng;
use thiserror::Error;

use crate::bits::Bits;
use crate::circuits::BoolFunction;

pub use codec::{MAGIC, VERSION};
pub use layout::{RegisterLayout, Segment};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QsimError {
    #[error("layout: {0}")]
    Layout(String),
    #[error("unknown register {0:?}")]
    UnknownRegister(String),
    #[error("width mismatch: expected {expected}, got {got}")]
    Width { expected: usize, got: usize },
    #[error("branch basis strings must be pairwise distinct")]
    DuplicateBranch,
    #[error("a state needs at least one branch")]
    Empty,
    #[error("register {0:?} is not zero on every branch")]
    NotZero(String),
    #[error("register {0:?} is not identical across branches")]
    NotConstant(String),
    #[error("post-measurement amplitudes are not of equal magnitude")]
    NonUniform,
    #[error("decode: {0}")]
    Codec(String),
    #[error("dense simulation limited to {max} qubits, got {got}")]
    TooLarge { max: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Branch {
    pub basis: Bits,
    /// Sign of the amplitude: `true` for -1.
    pub negative: bool,
}

impl Branch {
    pub fn new(basis: Bits, negative: bool) -> Self {
        Self { basis, negative }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseState {
    layout: RegisterLayout,
    branches: Vec<Branch>,
}

impl SparseState {
    pub fn new(layout: RegisterLayout, branches: Vec<Branch>) -> Result<Self, QsimError> {
        if branches.is_empty() {
            return Err(QsimError::Empty);
        }
        for b in &branches {
            if b.basis.len() != layout.total_width() {
                return Err(QsimError::Width { expected: layout.total_width(), got: b.basis.len() });
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(branches.len());
        if !branches.iter().all(|b| seen.insert(&b.basis)) {
            return Err(QsimError::DuplicateBranch);
        }
        Ok(Self { layout, branches })
    }

    pub fn basis_state(layout: RegisterLayout, v: Bits) -> Result<Self, QsimError> {
        Self::new(layout, vec![Branch::new(v, false)])
    }

    /// `(sign0·|v0⟩ + sign1·|v1⟩)/√2`.
    pub fn make_branch_pair(
        layout: RegisterLayout,
        v0: Bits,
        v1: Bits,
        negative0: bool,
        negative1: bool,
    ) -> Result<Self, QsimError> {
        Self::new(layout, vec![Branch::new(v0, negative0), Branch::new(v1, negative1)])
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn k(&self) -> usize {
        self.branches.len()
    }

    /// Value of register `name` on branch `j`.
    pub fn value(&self, j: usize, name: &str) -> Result<Bits, QsimError> {
        let r = self.layout.range(name)?;
        Ok(self.branches[j].basis.slice(r))
    }

    fn gather(&self, basis: &Bits, names: &[&str]) -> Result<Bits, QsimError> {
        let mut out = Bits::new();
        for n in names {
            out.extend(&basis.slice(self.layout.range(n)?));
        }
        Ok(out)
    }

    /// XORs `f(in_segs)` into `out_seg` on every branch.
    pub fn apply_classical_oracle(
        &mut self,
        f: &dyn BoolFunction,
        in_segs: &[&str],
        out_seg: &str,
    ) -> Result<(), QsimError> {
        let in_width: usize = in_segs.iter().map(|n| self.layout.width(n)).sum::<Result<usize, _>>()?;
        if in_width != f.n_inputs() {
            return Err(QsimError::Width { expected: f.n_inputs(), got: in_width });
        }
        let out = self.layout.segment(out_seg)?.clone();
        if out.width != f.n_outputs() {
            return Err(QsimError::Width { expected: f.n_outputs(), got: out.width });
        }
        if in_segs.contains(&out_seg) {
            return Err(QsimError::Layout("oracle output register overlaps its input".into()));
        }
        for j in 0..self.branches.len() {
            let x = self.gather(&self.branches[j].basis, in_segs)?;
            let y = f.eval_unchecked(&x);
            self.branches[j].basis.xor_at(out.offset, &y);
        }
        Ok(())
    }

    /// Negates the sign of every branch whose basis satisfies `pred`.
    pub fn apply_phase_flip(&mut self, pred: impl Fn(&Bits) -> bool) {
        for b in &mut self.branches {
            if pred(&b.basis) {
                b.negative = !b.negative;
            }
        }
    }

    /// Basis-copies the concatenation of `src` into the zeroed register `dst`.
    pub fn copy_registers(&mut self, src: &[&str], dst: &str) -> Result<(), QsimError> {
        let d = self.layout.segment(dst)?.clone();
        let src_width: usize = src.iter().map(|n| self.layout.width(n)).sum::<Result<usize, _>>()?;
        if src_width != d.width {
            return Err(QsimError::Width { expected: d.width, got: src_width });
        }
        if src.contains(&dst) {
            return Err(QsimError::Layout("copy destination overlaps its source".into()));
        }
        if self.branches.iter().any(|b| !b.basis.slice(d.range()).is_zero()) {
            return Err(QsimError::NotZero(dst.to_string()));
        }
        for j in 0..self.branches.len() {
            let v = self.gather(&self.branches[j].basis, src)?;
            self.branches[j].basis.write_at(d.offset, &v);
        }
        Ok(())
    }

    /// Appends a fresh register in state |0…0⟩.
    pub fn append_register(&mut self, name: &str, width: usize) -> Result<(), QsimError> {
        self.layout.push(name, width)?;
        let zeros = Bits::zeros(width);
        for b in &mut self.branches {
            b.basis.extend(&zeros);
        }
        Ok(())
    }

    /// Removes a register that holds the same value on every branch (so it is
    /// unentangled) and returns that value.
    pub fn discard_register(&mut self, name: &str) -> Result<Bits, QsimError> {
        let r = self.layout.range(name)?;
        let v = self.branches[0].basis.slice(r.clone());
        if self.branches.iter().any(|b| b.basis.slice(r.clone()) != v) {
            return Err(QsimError::NotConstant(name.to_string()));
        }
        self.layout = self.layout.without(&[name])?;
        for b in &mut self.branches {
            let mut nb = b.basis.slice(0..r.start);
            nb.extend(&b.basis.slice(r.end..b.basis.len()));
            b.basis = nb;
        }
        Ok(v)
    }

    /// Computational-basis measurement of `segs`. The outcome of branch `j` is
    /// its restriction to `segs`; an outcome's probability is its class size
    /// over `k`. The measured registers stay in the post-state.
    pub fn measure_computational<R: Rng + ?Sized>(
        &self,
        segs: &[&str],
        rng: &mut R,
    ) -> Result<(Bits, SparseState), QsimError> {
        self.layout.positions(segs)?;
        let outcomes: Vec<Bits> =
            self.branches.iter().map(|b| self.gather(&b.basis, segs)).collect::<Result<_, _>>()?;
        let single_class = outcomes.iter().all(|o| *o == outcomes[0]);
        let pick = if single_class { 0 } else { rng.gen_range(0..self.k()) };
        let outcome = outcomes[pick].clone();
        let branches =
            self.branches.iter().zip(&outcomes).filter(|(_, o)| **o == outcome).map(|(b, _)| b.clone()).collect();
        Ok((outcome, SparseState { layout: self.layout.clone(), branches }))
    }

    /// Probability of each computational outcome on `segs`, as (outcome, count, k).
    pub fn computational_distribution(&self, segs: &[&str]) -> Result<Vec<(Bits, usize)>, QsimError> {
        let mut classes: Vec<(Bits, usize)> = Vec::new();
        for b in &self.branches {
            let o = self.gather(&b.basis, segs)?;
            match classes.iter_mut().find(|(c, _)| *c == o) {
                Some(entry) => entry.1 += 1,
                None => classes.push((o, 1)),
            }
        }
        Ok(classes)
    }

    /// Hadamard-basis measurement of `segs`, which are removed from the layout.
    ///
    /// Write branch `j` as `s_j |a_j⟩|ρ_j⟩` with `a_j` on `segs` and `ρ_j` on the
    /// rest. Outcome `d` leaves `Σ_ρ A_ρ(d) |ρ⟩` with
    /// `A_ρ(d) = Σ_{j: ρ_j = ρ} s_j (-1)^{d·a_j}`, so `Pr[d] ∝ Σ_ρ A_ρ(d)²`.
    /// `d` is drawn by rejection from the uniform distribution, accepting with
    /// probability `Σ_ρ A_ρ(d)² / Σ_ρ |G_ρ|²`, which is exact. Branches that
    /// share a rest value can interfere to unequal magnitudes when `k > 2`;
    /// such outcomes are reported as [`QsimError::NonUniform`].
    pub fn measure_hadamard<R: Rng + ?Sized>(
        &self,
        segs: &[&str],
        rng: &mut R,
    ) -> Result<(Bits, SparseState), QsimError> {
        let width: usize = self.layout.positions(segs)?.len();
        let rest_layout = self.layout.without(segs)?;
        let rest_names: Vec<&str> = rest_layout.segments().iter().map(|s| s.name.as_str()).collect();

        // groups[g] = (rest value, [(a_j, negative_j)])
        let mut groups: Vec<(Bits, Vec<(Bits, bool)>)> = Vec::new();
        for b in &self.branches {
            let a = self.gather(&b.basis, segs)?;
            let rest = self.gather(&b.basis, &rest_names)?;
            match groups.iter_mut().find(|(r, _)| *r == rest) {
                Some((_, members)) => members.push((a, b.negative)),
                None => groups.push((rest, vec![(a, b.negative)])),
            }
        }
        let bound: i64 = groups.iter().map(|(_, m)| (m.len() * m.len()) as i64).sum();

        loop {
            let d = Bits::random(rng, width);
            let amps: Vec<i64> = groups
                .iter()
                .map(|(_, members)| members.iter().map(|(a, neg)| if *neg ^ d.dot(a) { -1 } else { 1 }).sum())
                .collect();
            let weight: i64 = amps.iter().map(|a| a * a).sum();
            let accept = if weight == bound {
                true
            } else if weight == 0 {
                false
            } else {
                rng.gen_range(0..bound) < weight
            };
            if !accept {
                continue;
            }
            let magnitude = amps.iter().find(|a| **a != 0).map(|a| a.abs()).unwrap();
            if amps.iter().any(|a| *a != 0 && a.abs() != magnitude) {
                return Err(QsimError::NonUniform);
            }
            let branches = groups
                .iter()
                .zip(&amps)
                .filter(|(_, a)| **a != 0)
                .map(|((rest, _), a)| Branch::new(rest.clone(), *a < 0))
                .collect();
            return Ok((d, SparseState { layout: rest_layout, branches }));
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(self)
    }

    /// Decodes onto a known layout; the encoded width must match it.
    pub fn from_bytes(bytes: &[u8], layout: RegisterLayout) -> Result<Self, QsimError> {
        codec::decode(bytes, layout)
    }

    /// Decodes onto a single register named `q`.
    pub fn from_bytes_flat(bytes: &[u8]) -> Result<Self, QsimError> {
        let width = codec::peek_width(bytes)?;
        codec::decode(bytes, RegisterLayout::flat(width))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::builders;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b(s: &str) -> Bits {
        Bits::parse(s).unwrap()
    }

    #[test]
    fn branch_pair_construction() {
        let s = SparseState::make_branch_pair(RegisterLayout::flat(2), b("00"), b("11"), false, false).unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(
            SparseState::make_branch_pair(RegisterLayout::flat(2), b("00"), b("00"), false, false),
            Err(QsimError::DuplicateBranch)
        );
        assert!(matches!(
            SparseState::make_branch_pair(RegisterLayout::flat(2), b("0"), b("11"), false, false),
            Err(QsimError::Width { .. })
        ));
    }

    #[test]
    fn oracle_and_into_third_bit() {
        let l = RegisterLayout::new(&[("x", 2), ("y", 1)]).unwrap();
        let mut s = SparseState::make_branch_pair(l, b("000"), b("110"), false, false).unwrap();
        s.apply_classical_oracle(&builders::and2(), &["x"], "y").unwrap();
        assert_eq!(s.branches()[0].basis, b("000"));
        assert_eq!(s.branches()[1].basis, b("111"));
        assert!(s.apply_classical_oracle(&builders::and2(), &["y"], "x").is_err());
    }

    #[test]
    fn oracle_parity_of_11_is_0() {
        let l = RegisterLayout::new(&[("x", 2), ("y", 1)]).unwrap();
        let mut s = SparseState::make_branch_pair(l, b("000"), b("110"), false, false).unwrap();
        s.apply_classical_oracle(&builders::parity(2), &["x"], "y").unwrap();
        assert_eq!(s.branches()[1].basis, b("110"));
    }

    #[test]
    fn computational_measurement_on_agreeing_bit_is_deterministic() {
        let l = RegisterLayout::new(&[("a", 1), ("b", 1)]).unwrap();
        let s = SparseState::make_branch_pair(l, b("00"), b("01"), false, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let (o, post) = s.measure_computational(&["a"], &mut rng).unwrap();
            assert_eq!(o, b("0"));
            assert_eq!(post.k(), 2);
        }
    }

    #[test]
    fn hadamard_full_measurement_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plus = SparseState::make_branch_pair(RegisterLayout::flat(2), b("00"), b("11"), false, false).unwrap();
        let minus = SparseState::make_branch_pair(RegisterLayout::flat(2), b("00"), b("11"), false, true).unwrap();
        for _ in 0..200 {
            let (d, post) = plus.measure_hadamard(&["q"], &mut rng).unwrap();
            assert!(d == b("00") || d == b("11"));
            assert_eq!(post.layout().total_width(), 0);
            let (d, _) = minus.measure_hadamard(&["q"], &mut rng).unwrap();
            assert!(d == b("01") || d == b("10"));
        }
    }

    #[test]
    fn hadamard_partial_keeps_relative_sign() {
        let l = RegisterLayout::new(&[("a", 1), ("b", 1)]).unwrap();
        let s = SparseState::make_branch_pair(l, b("00"), b("11"), false, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (d, post) = s.measure_hadamard(&["a"], &mut rng).unwrap();
            assert_eq!(post.k(), 2);
            assert!(!post.branches()[0].negative);
            assert_eq!(post.branches()[1].negative, d.get(0));
        }
    }

    #[test]
    fn phase_flip_is_an_involution() {
        let mut s = SparseState::make_branch_pair(RegisterLayout::flat(2), b("00"), b("11"), false, false).unwrap();
        let orig = s.clone();
        s.apply_phase_flip(|x| *x == b("11"));
        assert!(s.branches()[1].negative && !s.branches()[0].negative);
        s.apply_phase_flip(|x| *x == b("11"));
        assert_eq!(s, orig);
        s.apply_phase_flip(|_| false);
        assert_eq!(s, orig);
    }

    #[test]
    fn copy_registers_basis_copy() {
        let l = RegisterLayout::new(&[("x", 2), ("anc", 2)]).unwrap();
        let mut s = SparseState::make_branch_pair(l, b("0000"), b("1100"), false, false).unwrap();
        s.copy_registers(&["x"], "anc").unwrap();
        assert_eq!(s.branches()[1].basis, b("1111"));
        assert_eq!(s.copy_registers(&["x"], "anc"), Err(QsimError::NotZero("anc".into())));
    }

    #[test]
    fn append_and_discard() {
        let mut s = SparseState::make_branch_pair(RegisterLayout::flat(1), b("0"), b("1"), false, true).unwrap();
        s.append_register("z", 3).unwrap();
        assert_eq!(s.layout().total_width(), 4);
        assert_eq!(s.discard_register("z").unwrap(), b("000"));
        assert!(s.discard_register("q").is_err());
    }

    #[test]
    fn four_branch_interference_is_rejected_when_nonuniform() {
        // |00⟩|0⟩ + |01⟩|0⟩ + |10⟩|1⟩ + |11⟩|1⟩, measuring the first register:
        // groups have two members each, amplitudes are ±2 or 0 per group,
        // so any accepted outcome is uniform.
        let l = RegisterLayout::new(&[("a", 2), ("r", 1)]).unwrap();
        let branches = ["000", "010", "101", "111"].iter().map(|s| Branch::new(b(s), false)).collect();
        let s = SparseState::new(l.clone(), branches).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (_, post) = s.measure_hadamard(&["a"], &mut rng).unwrap();
            assert!(post.k() >= 1);
        }
        // Group sizes 2 and 1 give amplitudes {±2, 0} and {±1}: unequal.
        let branches = ["000", "010", "101"].iter().map(|s| Branch::new(b(s), false)).collect();
        let s = SparseState::new(l, branches).unwrap();
        let mut saw_error = false;
        for _ in 0..50 {
            if s.measure_hadamard(&["a"], &mut rng) == Err(QsimError::NonUniform) {
                saw_error = true;
            }
        }
        assert!(saw_error);
    }
}
