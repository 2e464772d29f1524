//! Dense real state-vector reference simulator, at most [`MAX_QUBITS`] qubits.
//!
//! Used as an independent oracle for the sparse simulator. Qubit 0 is the most
//! significant bit of the amplitude index, matching the bit order of [`Bits`].
//! All states here have real amplitudes, since the gate set (H, X, CNOT,
//! phase flips, permutations) never introduces complex phases.

use super::{QsimError, SparseState};
use crate::bits::Bits;
use crate::circuits::BoolFunction;

pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<f64>,
}

fn index_of(bits: &Bits) -> usize {
    bits.iter().fold(0usize, |acc, b| (acc << 1) | b as usize)
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self, QsimError> {
        if n > MAX_QUBITS {
            return Err(QsimError::TooLarge { max: MAX_QUBITS, got: n });
        }
        let mut amps = vec![0.0; 1 << n];
        amps[0] = 1.0;
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<f64>) -> Result<Self, QsimError> {
        if n > MAX_QUBITS {
            return Err(QsimError::TooLarge { max: MAX_QUBITS, got: n });
        }
        assert_eq!(amps.len(), 1 << n);
        Ok(Self { n, amps })
    }

    pub fn from_sparse(s: &SparseState) -> Result<Self, QsimError> {
        let n = s.layout().total_width();
        let mut st = Self::zero(n)?;
        st.amps[0] = 0.0;
        let mag = 1.0 / (s.k() as f64).sqrt();
        for b in s.branches() {
            st.amps[index_of(&b.basis)] = if b.negative { -mag } else { mag };
        }
        Ok(st)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn amplitude(&self, basis: &Bits) -> f64 {
        self.amps[index_of(basis)]
    }

    fn mask(&self, q: usize) -> usize {
        assert!(q < self.n, "qubit {q} out of range");
        1 << (self.n - 1 - q)
    }

    pub fn hadamard(&mut self, q: usize) {
        let m = self.mask(q);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a, b) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = s * (a + b);
                self.amps[i | m] = s * (a - b);
            }
        }
    }

    pub fn x(&mut self, q: usize) {
        let m = self.mask(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                self.amps.swap(i, i | m);
            }
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    pub fn phase_flip(&mut self, pred: impl Fn(&Bits) -> bool) {
        for i in 0..self.amps.len() {
            if pred(&Bits::from_u64(i as u64, self.n)) {
                self.amps[i] = -self.amps[i];
            }
        }
    }

    /// Applies the permutation unitary |x⟩ ↦ |perm(x)⟩.
    pub fn permute(&mut self, perm: impl Fn(&Bits) -> Bits) {
        let mut out = vec![0.0; self.amps.len()];
        let mut hit = vec![false; self.amps.len()];
        for i in 0..self.amps.len() {
            let j = index_of(&perm(&Bits::from_u64(i as u64, self.n)));
            assert!(!hit[j], "map is not a permutation");
            hit[j] = true;
            out[j] = self.amps[i];
        }
        self.amps = out;
    }

    /// |x, y⟩ ↦ |x, y ⊕ f(x)⟩ with x read from `inputs` and y at `outputs`.
    pub fn apply_oracle(&mut self, f: &dyn BoolFunction, inputs: &[usize], outputs: &[usize]) {
        assert_eq!(inputs.len(), f.n_inputs());
        assert_eq!(outputs.len(), f.n_outputs());
        self.permute(|v| {
            let x: Bits = inputs.iter().map(|&q| v.get(q)).collect();
            let y = f.eval_unchecked(&x);
            let mut w = v.clone();
            for (k, &q) in outputs.iter().enumerate() {
                w.set(q, w.get(q) ^ y.get(k));
            }
            w
        });
    }

    /// Tensors `width` fresh |0⟩ qubits onto the end.
    pub fn append_zero_qubits(&mut self, width: usize) -> Result<(), QsimError> {
        let n = self.n + width;
        if n > MAX_QUBITS {
            return Err(QsimError::TooLarge { max: MAX_QUBITS, got: n });
        }
        let mut amps = vec![0.0; 1 << n];
        for (i, a) in self.amps.iter().enumerate() {
            amps[i << width] = *a;
        }
        self.n = n;
        self.amps = amps;
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// Probability of reading `outcome` on `qubits` in the computational basis.
    pub fn probability(&self, qubits: &[usize], outcome: &Bits) -> f64 {
        self.amps.iter().enumerate().filter(|(i, _)| self.matches(*i, qubits, outcome)).map(|(_, a)| a * a).sum()
    }

    fn matches(&self, i: usize, qubits: &[usize], outcome: &Bits) -> bool {
        qubits.iter().enumerate().all(|(k, &q)| ((i & self.mask(q)) != 0) == outcome.get(k))
    }

    /// Computational-basis projection onto `outcome`, renormalized; keeps the
    /// measured qubits. Returns `None` for a zero-probability outcome.
    pub fn project(&self, qubits: &[usize], outcome: &Bits) -> Option<(f64, DenseState)> {
        let p = self.probability(qubits, outcome);
        if p < 1e-12 {
            return None;
        }
        let scale = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if self.matches(i, qubits, outcome) { a * scale } else { 0.0 })
            .collect();
        Some((p, DenseState { n: self.n, amps }))
    }

    /// Drops qubits that are in a definite computational state.
    pub fn remove_qubits(&self, qubits: &[usize]) -> DenseState {
        let keep: Vec<usize> = (0..self.n).filter(|q| !qubits.contains(q)).collect();
        let mut amps = vec![0.0; 1 << keep.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            let j = keep.iter().fold(0usize, |acc, &q| (acc << 1) | ((i & self.mask(q)) != 0) as usize);
            amps[j] += a;
        }
        DenseState { n: keep.len(), amps }
    }

    /// Hadamard-basis measurement conditioned on outcome `d`: apply H to
    /// `qubits`, project, and drop them.
    pub fn hadamard_conditional(&self, qubits: &[usize], d: &Bits) -> Option<(f64, DenseState)> {
        let mut t = self.clone();
        for &q in qubits {
            t.hadamard(q);
        }
        let (p, proj) = t.project(qubits, d)?;
        Some((p, proj.remove_qubits(qubits)))
    }

    /// Outcome probabilities for every d ∈ {0,1}^|qubits|, indexed big-endian.
    pub fn hadamard_distribution(&self, qubits: &[usize]) -> Vec<f64> {
        let mut t = self.clone();
        for &q in qubits {
            t.hadamard(q);
        }
        t.computational_distribution(qubits)
    }

    pub fn computational_distribution(&self, qubits: &[usize]) -> Vec<f64> {
        let mut dist = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let j = qubits.iter().fold(0usize, |acc, &q| (acc << 1) | ((i & self.mask(q)) != 0) as usize);
            dist[j] += a * a;
        }
        dist
    }

    pub fn max_abs_diff(&self, other: &DenseState) -> f64 {
        assert_eq!(self.n, other.n);
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn sub_norm(&self, other: &DenseState) -> f64 {
        assert_eq!(self.n, other.n);
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}
