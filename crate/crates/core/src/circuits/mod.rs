//! Boolean circuits over {AND, XOR, OR, NOT}.
//!
//! Wires `0..n_inputs` are the inputs; every gate defines one fresh wire and
//! the set of gate outputs is exactly `n_inputs..n_inputs + gates.len()`.

mod algebra;
pub mod builders;
mod function;
mod text;

use std::fmt;

use thiserror::Error;

use crate::bits::Bits;

pub use algebra::{BitAlgebra, CircuitBuilder, Plain, Wire};
pub use function::{BoolFunction, NativeFn, Registry};
pub use text::{emit_circuit, parse_circuit};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("topology: {0}")]
    Topology(String),
    #[error("arity mismatch: expected {expected} bits, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("unknown function {0:?}")]
    Unknown(String),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    Xor,
    Or,
    Not,
}

impl GateOp {
    pub fn arity(self) -> usize {
        match self {
            GateOp::Not => 1,
            _ => 2,
        }
    }

    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateOp::And => a & b,
            GateOp::Xor => a ^ b,
            GateOp::Or => a | b,
            GateOp::Not => !a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateOp::And => "AND",
            GateOp::Xor => "XOR",
            GateOp::Or => "OR",
            GateOp::Not => "NOT",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Some(GateOp::And),
            "XOR" => Some(GateOp::Xor),
            "OR" => Some(GateOp::Or),
            "NOT" | "INV" => Some(GateOp::Not),
            _ => None,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate. For `Not`, `b` repeats `a` and is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: GateOp,
    pub a: usize,
    pub b: usize,
    pub out: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    n_inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

impl Circuit {
    /// Validates topology: gate inputs must already be defined, gate outputs
    /// must be fresh and dense, outputs must reference defined wires.
    pub fn new(n_inputs: usize, gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self, CircuitError> {
        let total = n_inputs + gates.len();
        let mut defined = vec![false; total];
        defined[..n_inputs].fill(true);
        for (i, g) in gates.iter().enumerate() {
            let ins: &[usize] = if g.op.arity() == 1 { &[g.a] } else { &[g.a, g.b] };
            for &w in ins {
                if w >= total || !defined[w] {
                    return Err(CircuitError::Topology(format!("gate {i} reads wire {w} before it is defined")));
                }
            }
            if g.out < n_inputs || g.out >= total {
                return Err(CircuitError::Topology(format!(
                    "gate {i} output wire {} outside [{n_inputs}, {total})",
                    g.out
                )));
            }
            if defined[g.out] {
                return Err(CircuitError::Topology(format!("wire {} defined twice", g.out)));
            }
            defined[g.out] = true;
        }
        for &w in &outputs {
            if w >= total || !defined[w] {
                return Err(CircuitError::Topology(format!("output wire {w} is undefined")));
            }
        }
        let gates = gates.into_iter().map(|g| if g.op == GateOp::Not { Gate { b: g.a, ..g } } else { g }).collect();
        Ok(Self { n_inputs, gates, outputs })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn n_wires(&self) -> usize {
        self.n_inputs + self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn eval(&self, x: &Bits) -> Result<Bits, CircuitError> {
        if x.len() != self.n_inputs {
            return Err(CircuitError::Arity { expected: self.n_inputs, got: x.len() });
        }
        let mut wires = vec![false; self.n_wires()];
        for (i, b) in x.iter().enumerate() {
            wires[i] = b;
        }
        for g in &self.gates {
            wires[g.out] = g.op.apply(wires[g.a], wires[g.b]);
        }
        Ok(self.outputs.iter().map(|&w| wires[w]).collect())
    }

    /// Evaluates over an arbitrary bit algebra, e.g. to inline this circuit
    /// into a larger one being built.
    pub fn eval_in<A: BitAlgebra>(&self, alg: &mut A, x: &[A::Bit]) -> Vec<A::Bit> {
        assert_eq!(x.len(), self.n_inputs, "circuit input arity");
        let mut wires: Vec<Option<A::Bit>> = vec![None; self.n_wires()];
        for (i, b) in x.iter().enumerate() {
            wires[i] = Some(b.clone());
        }
        for g in &self.gates {
            let a = wires[g.a].as_ref().expect("topological order");
            let v = match g.op {
                GateOp::Not => alg.not(a),
                GateOp::And => {
                    let b = wires[g.b].as_ref().expect("topological order");
                    alg.and(a, b)
                }
                GateOp::Xor => {
                    let b = wires[g.b].as_ref().expect("topological order");
                    alg.xor(a, b)
                }
                GateOp::Or => {
                    let b = wires[g.b].as_ref().expect("topological order");
                    alg.or(a, b)
                }
            };
            wires[g.out] = Some(v);
        }
        self.outputs.iter().map(|&w| wires[w].clone().expect("defined output")).collect()
    }

    /// Stable 32-byte identifier of the circuit's structure.
    pub fn fingerprint(&self) -> [u8; 32] {
        crate::primitives::hash::digest(&[b"circuit", emit_circuit(self).as_bytes()])
    }

    pub fn count_op(&self, op: GateOp) -> usize {
        self.gates.iter().filter(|g| g.op == op).count()
    }
}
