//! Building blocks for simulating succinct-communication quantum protocols:
//! an exact sparse quantum-state simulator, boolean circuits, Yao garbling,
//! classical primitives, and the incompressibility experiment.

pub mod bits;
pub mod circuits;
pub mod corpus;
pub mod garbling;
pub mod impossibility;
pub mod primitives;
pub mod qsim;
pub mod seed;

pub use bits::Bits;
