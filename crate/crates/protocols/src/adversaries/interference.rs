//! Exact check of how the two branches of a two-branch state split between
//! the passing and failing outcomes of the Hadamard test.
//!
//! For branches `φb = |x_b⟩|f(x_b)⟩/√2` and `O` the Hadamard transform on
//! every qubit, the projections onto the passing outcomes
//! (`d·(x0⊕x1, f(x0)⊕f(x1)) = 0`) agree, and the projections onto the
//! failing outcomes are negatives of each other.

use rand::Rng;
use sfslab_core::circuits::BoolFunction;
use sfslab_core::qsim::dense::{DenseState, MAX_QUBITS};
use sfslab_core::Bits;

use crate::runtime::ProtocolError;

/// Largest input width the checker accepts.
pub const MAX_TOY_INPUT: usize = 3;

/// The state the server is assumed to start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyInput {
    /// Both branches with amplitude `1/√2`.
    Honest,
    /// Only the 0-branch, normalized; the 1-branch is zero.
    SingleBranch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceReport {
    /// Max over trials of `‖Π_pass O φ0 − Π_pass O φ1‖`.
    pub pass_deviation: f64,
    /// Max over trials of `‖Π_fail O φ0 + Π_fail O φ1‖`.
    pub fail_deviation: f64,
}

fn branch(x: &Bits, f: &dyn BoolFunction, scale: f64) -> Result<DenseState, ProtocolError> {
    let (n, m) = (f.n_inputs(), f.n_outputs());
    let mut st = DenseState::zero(n + m)?;
    for q in (0..n).filter(|&q| x.get(q)) {
        st.x(q);
    }
    let ins: Vec<usize> = (0..n).collect();
    let outs: Vec<usize> = (n..n + m).collect();
    st.apply_oracle(f, &ins, &outs);
    let amps = st.amplitudes().iter().map(|a| a * scale).collect();
    let mut st = DenseState::from_amplitudes(n + m, amps)?;
    for q in 0..n + m {
        st.hadamard(q);
    }
    Ok(st)
}

/// Samples `trials` pairs `x0 ≠ x1` and returns the largest deviation from
/// each identity.
pub fn check_interference_identity<R: Rng + ?Sized>(
    f: &dyn BoolFunction,
    input: ToyInput,
    trials: usize,
    rng: &mut R,
) -> Result<InterferenceReport, ProtocolError> {
    let (n, m) = (f.n_inputs(), f.n_outputs());
    if n == 0 || n > MAX_TOY_INPUT {
        return Err(ProtocolError::Config(format!("toy input width must be in 1..={MAX_TOY_INPUT}, got {n}")));
    }
    if n + m > MAX_QUBITS {
        return Err(ProtocolError::Config(format!("{} qubits exceed the dense cap of {MAX_QUBITS}", n + m)));
    }
    let mut report = InterferenceReport { pass_deviation: 0.0, fail_deviation: 0.0 };
    for _ in 0..trials {
        let x0 = Bits::random(rng, n);
        let x1 = loop {
            let c = Bits::random(rng, n);
            if c != x0 {
                break c;
            }
        };
        let delta = Bits::concat([&x0.xor(&x1), &f.eval(&x0)?.xor(&f.eval(&x1)?)]).to_u64();
        let (s0, s1) = match input {
            ToyInput::Honest => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
            ToyInput::SingleBranch => (1.0, 0.0),
        };
        let (o0, o1) = (branch(&x0, f, s0)?, branch(&x1, f, s1)?);
        let (mut pass, mut fail) = (0.0f64, 0.0f64);
        for (d, (a, b)) in o0.amplitudes().iter().zip(o1.amplitudes()).enumerate() {
            if (d as u64 & delta).count_ones() % 2 == 0 {
                pass += (a - b) * (a - b);
            } else {
                fail += (a + b) * (a + b);
            }
        }
        report.pass_deviation = report.pass_deviation.max(pass.sqrt());
        report.fail_deviation = report.fail_deviation.max(fail.sqrt());
    }
    Ok(report)
}
