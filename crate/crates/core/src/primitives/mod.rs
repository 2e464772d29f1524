//! Classical building blocks: keyed hash, generator, Naor commitment, Merkle
//! tree, and the collapsing game.

pub mod collapsing;
pub mod commit;
pub mod hash;
pub mod merkle;
pub mod prg;

pub use commit::{commit, verify_opening, CommitError, CommitParams, Commitment};
pub use hash::{HashError, HashFn};
pub use merkle::{MerkleError, MerkleTree};
pub use prg::prg_expand;
