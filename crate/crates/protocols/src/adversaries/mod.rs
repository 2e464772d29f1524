//! Cheating parties, the experiment runner that measures how often they get
//! through, and an exact interference check on toy states.

mod experiment;
mod interference;
mod strategies;

pub use experiment::{
    expander, run_soundness_experiment, wilson_interval, ExperimentProtocol, ExperimentReport, ExperimentSpec, Tally,
};
pub use interference::{check_interference_identity, InterferenceReport, ToyInput, MAX_TOY_INPUT};
pub use strategies::{server_adversary, Copying, GarbageComp, SingleBranch, WitnessSwap, REG_COPY, SERVER_ADVERSARIES};
