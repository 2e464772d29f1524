//! Server decision points. Every method defaults to honest behavior, so an
//! adversary overrides only the steps it attacks.

use rand_chacha::ChaCha20Rng;
use sfslab_core::circuits::BoolFunction;
use sfslab_core::qsim::SparseState;
use sfslab_core::Bits;

use super::{TestKind, REG_IN, REG_INPAD, REG_OUT, REG_OUTPAD, REG_SUB};
use crate::runtime::ProtocolError;

/// What the server reports after step 2 and the state it keeps.
#[derive(Debug, Clone)]
pub struct Step2 {
    pub d_in: Bits,
    pub d_inpad: Bits,
    pub state: SparseState,
}

/// Public context handed to the phase-2 witness hook.
pub struct WitnessContext<'a> {
    pub kind: TestKind,
    /// The statement the client revealed.
    pub x: &'a Bits,
    pub f: &'a dyn BoolFunction,
    pub n: usize,
    pub kappa: usize,
}

pub trait ServerStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Receives the client's state with a zeroed output register appended.
    fn step2(&self, state: SparseState, f: &dyn BoolFunction, rng: &mut ChaCha20Rng) -> Result<Step2, ProtocolError> {
        honest_step2(state, f, rng)
    }

    /// Witness for the computational-basis test.
    fn comp_test_witness(&self, state: &SparseState, rng: &mut ChaCha20Rng) -> Result<Bits, ProtocolError> {
        Ok(state.measure_computational(&[REG_SUB, REG_OUTPAD, REG_OUT], rng)?.0)
    }

    /// Witness for the Hadamard-basis test.
    fn hadamard_test_witness(&self, state: &SparseState, rng: &mut ChaCha20Rng) -> Result<Bits, ProtocolError> {
        Ok(state.measure_hadamard(&[REG_SUB, REG_OUTPAD, REG_OUT], rng)?.0)
    }

    /// Computation mode: the reply `c` and the output the server keeps.
    fn comp_mode_reply(&self, state: &SparseState, rng: &mut ChaCha20Rng) -> Result<(Bits, Bits), ProtocolError> {
        let (c, post) = state.measure_computational(&[REG_SUB, REG_OUTPAD], rng)?;
        Ok((c, post.value(0, REG_OUT)?))
    }

    /// Witness argued after the statement is revealed.
    fn phase2_witness(&self, _ctx: &WitnessContext<'_>, committed: &Bits) -> Bits {
        committed.clone()
    }
}

/// Evaluate `f` into the output register, then measure the input and input
/// padding registers in the Hadamard basis.
pub fn honest_step2(
    mut state: SparseState,
    f: &dyn BoolFunction,
    rng: &mut ChaCha20Rng,
) -> Result<Step2, ProtocolError> {
    state.apply_classical_oracle(f, &[REG_IN], REG_OUT)?;
    let n = state.layout().width(REG_IN)?;
    let (d, post) = state.measure_hadamard(&[REG_IN, REG_INPAD], rng)?;
    Ok(Step2 { d_in: d.slice(0..n), d_inpad: d.slice(n..d.len()), state: post })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Honest;

impl ServerStrategy for Honest {
    fn name(&self) -> &str {
        "honest"
    }
}
