//! Self-describing binary container for a garbled circuit and, optionally,
//! the input labels that go with it.
//!
//! Layout: `"GRBL"`, version byte, suite tag, κ (u32), input count (u32),
//! output count (u32), circuit fingerprint (32 bytes), encoding length in
//! bits (u64), packed encoding, label flag byte, then packed labels.

use super::{CircuitEncoding, GarbleError, InputEncoding};
use crate::bits::Bits;
use crate::circuits::Circuit;

const MAGIC: &[u8; 4] = b"GRBL";
const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarbledPackage {
    pub suite_tag: u8,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub ce: CircuitEncoding,
    pub ie: Option<InputEncoding>,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], GarbleError> {
        if self.pos + n > self.buf.len() {
            return Err(GarbleError::Package("truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, GarbleError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize, GarbleError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<usize, GarbleError> {
        let v = u64::from_be_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| GarbleError::Package("length overflow".into()))
    }

    fn bits(&mut self, len: usize) -> Result<Bits, GarbleError> {
        let bytes = self.take(len.div_ceil(8))?;
        Bits::from_bytes(bytes, len).map_err(|e| GarbleError::Package(e.to_string()))
    }
}

impl GarbledPackage {
    pub fn new(suite_tag: u8, c: &Circuit, ce: CircuitEncoding, ie: Option<InputEncoding>) -> Self {
        Self { suite_tag, n_inputs: c.n_inputs(), n_outputs: c.n_outputs(), ce, ie }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.suite_tag);
        out.extend_from_slice(&(self.ce.kappa as u32).to_be_bytes());
        out.extend_from_slice(&(self.n_inputs as u32).to_be_bytes());
        out.extend_from_slice(&(self.n_outputs as u32).to_be_bytes());
        out.extend_from_slice(&self.ce.fingerprint);
        out.extend_from_slice(&(self.ce.r_gcin_len as u64).to_be_bytes());
        out.extend_from_slice(&(self.ce.bits.len() as u64).to_be_bytes());
        out.extend(self.ce.bits.to_bytes());
        match &self.ie {
            Some(ie) => {
                out.push(1);
                out.extend(ie.to_flat().to_bytes());
            }
            None => out.push(0),
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, GarbleError> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(GarbleError::Package("bad magic".into()));
        }
        if r.u8()? != VERSION {
            return Err(GarbleError::Package("unsupported version".into()));
        }
        let suite_tag = r.u8()?;
        let kappa = r.u32()?;
        if kappa < 2 {
            return Err(GarbleError::Package("label length too small".into()));
        }
        let n_inputs = r.u32()?;
        let n_outputs = r.u32()?;
        let fingerprint: [u8; 32] = r.take(32)?.try_into().unwrap();
        let r_gcin_len = r.u64()?;
        let len = r.u64()?;
        let bits = r.bits(len)?;
        let ie = match r.u8()? {
            0 => None,
            1 => Some(InputEncoding::from_flat(&r.bits(n_inputs * kappa)?, kappa)?),
            _ => return Err(GarbleError::Package("bad label flag".into())),
        };
        if r.pos != buf.len() {
            return Err(GarbleError::Package("trailing bytes".into()));
        }
        Ok(Self { suite_tag, n_inputs, n_outputs, ce: CircuitEncoding { kappa, fingerprint, r_gcin_len, bits }, ie })
    }
}
