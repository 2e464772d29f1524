//! Two-party protocols over simulated sessions: succinct witness tests,
//! secure function sampling with amplification, value preparation, and
//! two-party computation, plus an adversary harness.

pub mod adversaries;
pub mod runtime;
pub mod sfs;
pub mod sfvp;
pub mod succ_test;
pub mod twopc;
