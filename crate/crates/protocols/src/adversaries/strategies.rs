//! Canonical cheating servers. Each overrides one decision point and keeps
//! the honest default everywhere else.

use std::sync::Arc;

use rand_chacha::ChaCha20Rng;
use sfslab_core::circuits::BoolFunction;
use sfslab_core::qsim::SparseState;
use sfslab_core::Bits;

use crate::runtime::ProtocolError;
use crate::sfs::{honest_step2, Honest, ServerStrategy, Step2, TestKind, WitnessContext, REG_IN, REG_SUB};

/// Names accepted by [`server_adversary`].
pub const SERVER_ADVERSARIES: &[&str] = &["honest", "copying", "single-branch", "witness-swap", "garbage-comp"];

/// Looks up a registered server strategy.
pub fn server_adversary(name: &str) -> Result<Arc<dyn ServerStrategy>, ProtocolError> {
    Ok(match name {
        "honest" => Arc::new(Honest),
        "copying" => Arc::new(Copying),
        "single-branch" => Arc::new(SingleBranch),
        "witness-swap" => Arc::new(WitnessSwap),
        "garbage-comp" => Arc::new(GarbageComp),
        _ => return Err(ProtocolError::UnknownAdversary(name.to_string())),
    })
}

/// Copies the input register in the computational basis before running
/// the honest step. The branches then differ on a register nobody measures,
/// so the later Hadamard outcome carries no parity information.
#[derive(Debug, Clone, Copy, Default)]
pub struct Copying;

pub const REG_COPY: &str = "copy";

impl ServerStrategy for Copying {
    fn name(&self) -> &str {
        "copying"
    }

    fn step2(
        &self,
        mut state: SparseState,
        f: &dyn BoolFunction,
        rng: &mut ChaCha20Rng,
    ) -> Result<Step2, ProtocolError> {
        let n = state.layout().width(REG_IN)?;
        state.append_register(REG_COPY, n)?;
        state.copy_registers(&[REG_IN], REG_COPY)?;
        honest_step2(state, f, rng)
    }
}

/// Measures the branch selector before doing anything else, collapsing the
/// state to one branch.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingleBranch;

impl ServerStrategy for SingleBranch {
    fn name(&self) -> &str {
        "single-branch"
    }

    fn step2(&self, state: SparseState, f: &dyn BoolFunction, rng: &mut ChaCha20Rng) -> Result<Step2, ProtocolError> {
        let (_, post) = state.measure_computational(&[REG_SUB], rng)?;
        honest_step2(post, f, rng)
    }
}

/// Commits to the honest witness, then argues a different one that still
/// satisfies the revealed relation whenever that is possible.
#[derive(Debug, Clone, Copy, Default)]
pub struct WitnessSwap;

impl ServerStrategy for WitnessSwap {
    fn name(&self) -> &str {
        "witness-swap"
    }

    fn phase2_witness(&self, ctx: &WitnessContext<'_>, committed: &Bits) -> Bits {
        let (n, kappa) = (ctx.n, ctx.kappa);
        let r0 = ctx.x.slice(2 * n..2 * n + kappa);
        let r1 = ctx.x.slice(2 * n + kappa..2 * n + 2 * kappa);
        let mut w = committed.clone();
        match ctx.kind {
            TestKind::Hadamard => {
                // Flipping d_sub together with one outpad bit where the
                // paddings differ leaves the parity unchanged.
                w.set(0, !w.get(0));
                if let Some(j) = (0..kappa).find(|&j| r0.get(j) != r1.get(j)) {
                    w.set(1 + j, !w.get(1 + j));
                }
            }
            TestKind::Computational => {
                // The other branch's witness.
                let other = !w.get(0);
                let (x, r) = if other { (ctx.x.slice(n..2 * n), r1) } else { (ctx.x.slice(0..n), r0) };
                w = Bits::concat([&Bits::from_bools(&[other]), &r, &ctx.f.eval_unchecked(&x)]);
            }
        }
        w
    }
}

/// Replies in computation mode with a string matching neither branch.
#[derive(Debug, Clone, Copy, Default)]
pub struct GarbageComp;

impl ServerStrategy for GarbageComp {
    fn name(&self) -> &str {
        "garbage-comp"
    }

    fn comp_mode_reply(&self, state: &SparseState, rng: &mut ChaCha20Rng) -> Result<(Bits, Bits), ProtocolError> {
        let (mut c, y) = Honest.comp_mode_reply(state, rng)?;
        // Keeping the sub bit and flipping a padding bit lands outside both
        // branches.
        let last = c.len() - 1;
        c.set(last, !c.get(last));
        Ok((c, y))
    }
}
