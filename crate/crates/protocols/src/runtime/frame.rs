//! Length-prefixed frames: `u32` big-endian payload length, one tag byte,
//! then the payload.

use std::io::{Read, Write};

use super::ProtocolError;

pub const HEADER_LEN: usize = 5;
/// Frames above this size are refused on read.
pub const MAX_PAYLOAD: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Classical = 0x01,
    /// Serialized sparse state standing in for a quantum message.
    State = 0x02,
    Control = 0x03,
}

impl Tag {
    pub fn from_byte(b: u8) -> Result<Self, ProtocolError> {
        match b {
            0x01 => Ok(Tag::Classical),
            0x02 => Ok(Tag::State),
            0x03 => Ok(Tag::Control),
            _ => Err(ProtocolError::Decode(format!("unknown frame tag {b:#04x}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tag::Classical => "classical",
            Tag::State => "state",
            Tag::Control => "control",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub tag: Tag,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(tag: Tag, payload: Vec<u8>) -> Self {
        Self { tag, payload }
    }

    /// Bytes on the wire, header included.
    pub fn wire_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.push(self.tag as u8);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolError> {
        if bytes.len() < HEADER_LEN {
            return Err(ProtocolError::Decode("frame shorter than its header".into()));
        }
        let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        if bytes.len() != HEADER_LEN + len {
            return Err(ProtocolError::Decode(format!(
                "frame declares {len} payload bytes but carries {}",
                bytes.len() - HEADER_LEN
            )));
        }
        Ok(Self { tag: Tag::from_byte(bytes[4])?, payload: bytes[HEADER_LEN..].to_vec() })
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), ProtocolError> {
        w.write_all(&self.encode())?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, ProtocolError> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)?;
        let len = u32::from_be_bytes(header[..4].try_into().unwrap()) as usize;
        if len > MAX_PAYLOAD {
            return Err(ProtocolError::Decode(format!("frame payload of {len} bytes refused")));
        }
        let tag = Tag::from_byte(header[4])?;
        let mut payload = vec![0u8; len];
        r.read_exact(&mut payload)?;
        Ok(Self { tag, payload })
    }
}
