//! Payload encoding: fixed-width big-endian integers, and bit strings or byte
//! strings prefixed with their `u32` length.

use sfslab_core::Bits;

use super::ProtocolError;

#[derive(Debug, Default)]
pub struct WireWriter(Vec<u8>);

impl WireWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u8(mut self, v: u8) -> Self {
        self.0.push(v);
        self
    }

    pub fn u32(mut self, v: u32) -> Self {
        self.0.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(mut self, v: u64) -> Self {
        self.0.extend_from_slice(&v.to_be_bytes());
        self
    }

    /// Bit length, then the packed bits.
    pub fn bits(mut self, b: &Bits) -> Self {
        self.0.extend_from_slice(&(b.len() as u32).to_be_bytes());
        self.0.extend(b.to_bytes());
        self
    }

    pub fn bytes(mut self, b: &[u8]) -> Self {
        self.0.extend_from_slice(&(b.len() as u32).to_be_bytes());
        self.0.extend_from_slice(b);
        self
    }

    pub fn raw(mut self, b: &[u8]) -> Self {
        self.0.extend_from_slice(b);
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.0
    }
}

pub struct WireReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> WireReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ProtocolError> {
        if self.buf.len() - self.pos < n {
            return Err(ProtocolError::Decode("payload truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, ProtocolError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, ProtocolError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, ProtocolError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bits(&mut self) -> Result<Bits, ProtocolError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len.div_ceil(8))?;
        let b = Bits::from_bytes(bytes, len).map_err(|e| ProtocolError::Decode(e.to_string()))?;
        if b.to_bytes() != bytes {
            return Err(ProtocolError::Decode("nonzero padding bits".into()));
        }
        Ok(b)
    }

    /// Bits of a length fixed by the protocol.
    pub fn bits_exact(&mut self, len: usize) -> Result<Bits, ProtocolError> {
        let b = self.bits()?;
        if b.len() != len {
            return Err(ProtocolError::Decode(format!("expected {len} bits, got {}", b.len())));
        }
        Ok(b)
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], ProtocolError> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub fn raw(&mut self, n: usize) -> Result<&'a [u8], ProtocolError> {
        self.take(n)
    }

    pub fn finish(self) -> Result<(), ProtocolError> {
        if self.pos != self.buf.len() {
            return Err(ProtocolError::Decode(format!("{} trailing payload bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}
