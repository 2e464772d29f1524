//! Session plumbing: framing, payload codecs, transports with strict
//! alternation, and byte-accounted transcripts.

mod frame;
mod session;
mod transcript;
mod wire;

use sfslab_core::circuits::CircuitError;
use sfslab_core::garbling::GarbleError;
use sfslab_core::primitives::{CommitError, HashError};
use sfslab_core::qsim::QsimError;
use thiserror::Error;

pub use frame::{Frame, Tag, HEADER_LEN, MAX_PAYLOAD};
pub use session::{is_abort, run_session, Channel, Endpoint, Role, SessionResult, CONTROL_ABORT};
pub use transcript::{Direction, Entry, GroupBy, ReportRow, Transcript};
pub use wire::{WireReader, WireWriter};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("decode: {0}")]
    Decode(String),
    #[error("alternation violated: {0}")]
    Alternation(String),
    #[error("expected a {expected} frame at {step}, got {got}")]
    UnexpectedTag { step: String, expected: &'static str, got: &'static str },
    #[error("peer disconnected")]
    Disconnected,
    /// The peer ended the protocol with an abort message.
    #[error("peer aborted")]
    Aborted,
    #[error("io: {0}")]
    Io(String),
    #[error("simulator: {0}")]
    Qsim(#[from] QsimError),
    #[error("garbling: {0}")]
    Garble(#[from] GarbleError),
    #[error("circuit: {0}")]
    Circuit(#[from] CircuitError),
    #[error("hash: {0}")]
    Hash(#[from] HashError),
    #[error("commitment: {0}")]
    Commit(#[from] CommitError),
    #[error("configuration: {0}")]
    Config(String),
    /// Witness-register access requested without a harness grant.
    #[error("witness oracle access denied")]
    OracleDenied,
    #[error("unknown adversary {0:?}")]
    UnknownAdversary(String),
}

impl From<std::io::Error> for ProtocolError {
    fn from(e: std::io::Error) -> Self {
        use std::io::ErrorKind::*;
        match e.kind() {
            UnexpectedEof | ConnectionReset | ConnectionAborted | BrokenPipe => ProtocolError::Disconnected,
            _ => ProtocolError::Io(e.to_string()),
        }
    }
}
