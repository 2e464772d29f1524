//! Bit algebras: the same code can compute on booleans or record a circuit.

use super::{Circuit, CircuitError, Gate, GateOp};

pub trait BitAlgebra {
    type Bit: Clone;

    fn constant(&mut self, v: bool) -> Self::Bit;
    fn xor(&mut self, a: &Self::Bit, b: &Self::Bit) -> Self::Bit;
    fn and(&mut self, a: &Self::Bit, b: &Self::Bit) -> Self::Bit;
    fn not(&mut self, a: &Self::Bit) -> Self::Bit;

    fn or(&mut self, a: &Self::Bit, b: &Self::Bit) -> Self::Bit {
        let x = self.xor(a, b);
        let y = self.and(a, b);
        self.xor(&x, &y)
    }

    fn constants(&mut self, bits: impl IntoIterator<Item = bool>) -> Vec<Self::Bit> {
        bits.into_iter().map(|b| self.constant(b)).collect()
    }

    fn xor_vec(&mut self, a: &[Self::Bit], b: &[Self::Bit]) -> Vec<Self::Bit> {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| self.xor(x, y)).collect()
    }

    fn and_vec(&mut self, a: &[Self::Bit], b: &[Self::Bit]) -> Vec<Self::Bit> {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| self.and(x, y)).collect()
    }

    /// Swaps `x` and `y` when `c` is set.
    fn cond_swap(&mut self, c: &Self::Bit, x: &mut [Self::Bit], y: &mut [Self::Bit]) {
        assert_eq!(x.len(), y.len());
        for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
            let d = self.xor(xi, yi);
            let t = self.and(c, &d);
            *xi = self.xor(xi, &t);
            *yi = self.xor(yi, &t);
        }
    }
}

/// Ordinary boolean evaluation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Plain;

impl BitAlgebra for Plain {
    type Bit = bool;

    fn constant(&mut self, v: bool) -> bool {
        v
    }
    fn xor(&mut self, a: &bool, b: &bool) -> bool {
        a ^ b
    }
    fn and(&mut self, a: &bool, b: &bool) -> bool {
        a & b
    }
    fn not(&mut self, a: &bool) -> bool {
        !a
    }
    fn or(&mut self, a: &bool, b: &bool) -> bool {
        a | b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wire {
    Const(bool),
    Id(usize),
}

/// Records operations as gates, folding constants and trivial identities
/// (`x ^ x`, `x & x`) so that public values never become gates.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    n_inputs: usize,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new(n_inputs: usize) -> Self {
        Self { n_inputs, gates: Vec::new() }
    }

    pub fn inputs(&self) -> Vec<Wire> {
        (0..self.n_inputs).map(Wire::Id).collect()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    fn emit(&mut self, op: GateOp, a: usize, b: usize) -> Wire {
        let out = self.n_inputs + self.gates.len();
        self.gates.push(Gate { op, a, b, out });
        Wire::Id(out)
    }

    /// Materializes constant outputs from input 0 and validates the result.
    pub fn finish(mut self, outputs: &[Wire]) -> Result<Circuit, CircuitError> {
        let mut zero = None;
        let mut one = None;
        let mut ids = Vec::with_capacity(outputs.len());
        for w in outputs {
            let id = match *w {
                Wire::Id(id) => id,
                Wire::Const(v) => {
                    if self.n_inputs == 0 {
                        return Err(CircuitError::Topology("constant output in a circuit without inputs".into()));
                    }
                    let z = *zero.get_or_insert_with(|| match self.emit(GateOp::Xor, 0, 0) {
                        Wire::Id(id) => id,
                        Wire::Const(_) => unreachable!(),
                    });
                    if v {
                        *one.get_or_insert_with(|| match self.emit(GateOp::Not, z, z) {
                            Wire::Id(id) => id,
                            Wire::Const(_) => unreachable!(),
                        })
                    } else {
                        z
                    }
                }
            };
            ids.push(id);
        }
        Circuit::new(self.n_inputs, self.gates, ids)
    }
}

impl BitAlgebra for CircuitBuilder {
    type Bit = Wire;

    fn constant(&mut self, v: bool) -> Wire {
        Wire::Const(v)
    }

    fn xor(&mut self, a: &Wire, b: &Wire) -> Wire {
        match (*a, *b) {
            (Wire::Const(x), Wire::Const(y)) => Wire::Const(x ^ y),
            (Wire::Const(false), w) | (w, Wire::Const(false)) => w,
            (Wire::Const(true), w) | (w, Wire::Const(true)) => self.not(&w),
            (Wire::Id(x), Wire::Id(y)) if x == y => Wire::Const(false),
            (Wire::Id(x), Wire::Id(y)) => self.emit(GateOp::Xor, x, y),
        }
    }

    fn and(&mut self, a: &Wire, b: &Wire) -> Wire {
        match (*a, *b) {
            (Wire::Const(x), Wire::Const(y)) => Wire::Const(x & y),
            (Wire::Const(false), _) | (_, Wire::Const(false)) => Wire::Const(false),
            (Wire::Const(true), w) | (w, Wire::Const(true)) => w,
            (Wire::Id(x), Wire::Id(y)) if x == y => Wire::Id(x),
            (Wire::Id(x), Wire::Id(y)) => self.emit(GateOp::And, x, y),
        }
    }

    fn not(&mut self, a: &Wire) -> Wire {
        match *a {
            Wire::Const(v) => Wire::Const(!v),
            Wire::Id(x) => self.emit(GateOp::Not, x, x),
        }
    }

    fn or(&mut self, a: &Wire, b: &Wire) -> Wire {
        match (*a, *b) {
            (Wire::Const(x), Wire::Const(y)) => Wire::Const(x | y),
            (Wire::Const(true), _) | (_, Wire::Const(true)) => Wire::Const(true),
            (Wire::Const(false), w) | (w, Wire::Const(false)) => w,
            (Wire::Id(x), Wire::Id(y)) if x == y => Wire::Id(x),
            (Wire::Id(x), Wire::Id(y)) => self.emit(GateOp::Or, x, y),
        }
    }
}
