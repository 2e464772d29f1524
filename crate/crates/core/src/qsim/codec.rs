//! Wire form: "QSFS" ‖ version u8 ‖ width u32 BE ‖ k u32 BE ‖ k × (sign u8 ‖
//! ceil(width/8) basis bytes). Sign 0x00 is +, 0x01 is −. Bases pack MSB-first.

use super::{Branch, QsimError, RegisterLayout, SparseState};
use crate::bits::Bits;

pub const MAGIC: &[u8; 4] = b"QSFS";
pub const VERSION: u8 = 1;
const HEADER: usize = 4 + 1 + 4 + 4;

pub(super) fn encode(s: &SparseState) -> Vec<u8> {
    let width = s.layout.total_width();
    let row = 1 + width.div_ceil(8);
    let mut out = Vec::with_capacity(HEADER + s.k() * row);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(width as u32).to_be_bytes());
    out.extend_from_slice(&(s.k() as u32).to_be_bytes());
    for b in &s.branches {
        out.push(b.negative as u8);
        out.extend_from_slice(&b.basis.to_bytes());
    }
    out
}

fn header(bytes: &[u8]) -> Result<(usize, usize), QsimError> {
    if bytes.len() < HEADER {
        return Err(QsimError::Codec(format!("buffer of {} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(QsimError::Codec("bad magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(QsimError::Codec(format!("unsupported version {}", bytes[4])));
    }
    let width = u32::from_be_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let k = u32::from_be_bytes(bytes[9..13].try_into().unwrap()) as usize;
    Ok((width, k))
}

pub(super) fn peek_width(bytes: &[u8]) -> Result<usize, QsimError> {
    Ok(header(bytes)?.0)
}

pub(super) fn decode(bytes: &[u8], layout: RegisterLayout) -> Result<SparseState, QsimError> {
    let (width, k) = header(bytes)?;
    if width != layout.total_width() {
        return Err(QsimError::Width { expected: layout.total_width(), got: width });
    }
    let row = 1 + width.div_ceil(8);
    let expected = k
        .checked_mul(row)
        .and_then(|v| v.checked_add(HEADER))
        .ok_or_else(|| QsimError::Codec("length overflow".into()))?;
    if bytes.len() != expected {
        return Err(QsimError::Codec(format!(
            "expected {expected} bytes for {k} branches of width {width}, got {}",
            bytes.len()
        )));
    }
    let mut branches = Vec::with_capacity(k);
    for chunk in bytes[HEADER..].chunks(row) {
        let negative = match chunk[0] {
            0 => false,
            1 => true,
            other => return Err(QsimError::Codec(format!("bad sign byte {other:#04x}"))),
        };
        let basis = Bits::from_bytes(&chunk[1..], width).expect("row sized for width");
        if basis.to_bytes() != chunk[1..] {
            return Err(QsimError::Codec("nonzero padding bits".into()));
        }
        branches.push(Branch::new(basis, negative));
    }
    SparseState::new(layout, branches)
}
