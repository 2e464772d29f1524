//! Sampling a randomized function `f(x; ρ)`: run the plain protocol on
//! `g(x, s) = f(x; PRG(s))` with a short seed `s`, then drop `s`. The state
//! the client sends grows with `|s|`, not with the coin length.

use std::sync::Arc;

use sfslab_core::circuits::BoolFunction;
use sfslab_core::primitives::prg_expand;
use sfslab_core::seed::Seed;
use sfslab_core::Bits;

use super::{run_sfs, ServerStrategy, SfsParams};
use crate::runtime::{Channel, ProtocolError, Transcript};

/// A function of `x ‖ ρ` whose trailing inputs are coins.
pub type CoinFn = Arc<dyn BoolFunction>;

/// `g(x ‖ s) = f(x ‖ prg_expand(s, coins))`.
#[derive(Clone)]
pub struct SeededFn {
    f: CoinFn,
    n: usize,
    seed_len: usize,
    coins: usize,
}

impl SeededFn {
    pub fn new(f: CoinFn, n: usize, seed_len: usize) -> Result<Self, ProtocolError> {
        let coins = f.n_inputs().checked_sub(n).ok_or_else(|| {
            ProtocolError::Config(format!("function takes {} inputs, fewer than n = {n}", f.n_inputs()))
        })?;
        Ok(Self { f, n, seed_len, coins })
    }

    pub fn coins(&self) -> usize {
        self.coins
    }

    /// Splits a sampled input into `(x, s)`.
    pub fn split(&self, xs: &Bits) -> (Bits, Bits) {
        (xs.slice(0..self.n), xs.slice(self.n..xs.len()))
    }
}

impl BoolFunction for SeededFn {
    fn n_inputs(&self) -> usize {
        self.n + self.seed_len
    }

    fn n_outputs(&self) -> usize {
        self.f.n_outputs()
    }

    fn eval_unchecked(&self, xs: &Bits) -> Bits {
        let (x, s) = self.split(xs);
        self.f.eval_unchecked(&Bits::concat([&x, &prg_expand(&s, self.coins)]))
    }
}

#[derive(Debug)]
pub struct RandomizedOutcome {
    pub client_flag: bool,
    pub server_flag: bool,
    pub x_out: Option<Bits>,
    pub y_out: Option<Bits>,
    pub transcript: Transcript,
    /// The seed the client discarded, kept only so tests can check
    /// `y = f(x; PRG(s))`.
    pub test_hook_seed: Option<Bits>,
}

/// `params.n` is the length of `x`; the seed length is `params.kappa`.
pub fn run_sfs_randomized(
    channel: &Channel,
    params: &SfsParams,
    f: CoinFn,
    strategy: Arc<dyn ServerStrategy>,
    seed: &Seed,
) -> Result<RandomizedOutcome, ProtocolError> {
    let g = SeededFn::new(f, params.n, params.kappa)?;
    let mut inner = params.clone();
    inner.n = params.n + params.kappa;
    let run = run_sfs(channel, &inner, Arc::new(g.clone()), strategy, seed)?;
    let (x_out, s) = match &run.client.x_out {
        Some(xs) => {
            let (x, s) = g.split(xs);
            (Some(x), Some(s))
        }
        None => (None, None),
    };
    Ok(RandomizedOutcome {
        client_flag: run.client.flag,
        server_flag: run.server.flag,
        x_out,
        y_out: run.server.y_out,
        transcript: run.transcript,
        test_hook_seed: s,
    })
}
