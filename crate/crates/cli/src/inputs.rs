//! Parsing of circuits and bit-string inputs given on the command line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use sfslab_core::circuits::{parse_circuit, Circuit, Registry};
use sfslab_core::Bits;

/// A circuit file path, or the name of a built-in circuit.
pub fn load_circuit(spec: &str) -> Result<Circuit> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return parse_circuit(&text).with_context(|| format!("parsing {spec}"));
    }
    let registry = Registry::with_builtins();
    let f = registry
        .get(spec)
        .with_context(|| format!("{spec} is neither a circuit file nor a built-in ({})", builtin_names(&registry)))?;
    match f.circuit() {
        Some(c) => Ok(c.clone()),
        None => bail!("built-in {spec} has no circuit form"),
    }
}

fn builtin_names(r: &Registry) -> String {
    r.names().collect::<Vec<_>>().join(", ")
}

/// An `n`-bit input: `0b` followed by exactly `n` binary digits, or hex
/// digits read MSB-first whose bits past `n` must be zero.
pub fn parse_input(s: &str, n: usize) -> Result<Bits> {
    if let Some(bin) = s.strip_prefix("0b") {
        let b = Bits::parse(bin)?;
        if b.len() != n {
            bail!("{s}: expected {n} binary digits, got {}", b.len());
        }
        return Ok(b);
    }
    let b = Bits::from_hex(s, None)?;
    if b.len() < n {
        bail!("{s}: {} hex bits cannot hold a {n}-bit input", b.len());
    }
    if !b.slice(n..b.len()).is_zero() {
        bail!("{s}: nonzero bits beyond the first {n}");
    }
    Ok(b.slice(0..n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_inputs_are_left_aligned() {
        assert_eq!(parse_input("8", 2).unwrap().to_string(), "10");
        assert!(parse_input("a", 2).is_err());
        assert_eq!(parse_input("0xc0", 3).unwrap().to_string(), "110");
        assert!(parse_input("b", 2).is_err());
        assert!(parse_input("a", 5).is_err());
    }

    #[test]
    fn binary_inputs_need_exact_width() {
        assert_eq!(parse_input("0b101", 3).unwrap().to_string(), "101");
        assert!(parse_input("0b10", 3).is_err());
    }

    #[test]
    fn builtins_resolve_by_name() {
        assert_eq!(load_circuit("adder4").unwrap().n_inputs(), 8);
        assert!(load_circuit("no-such-circuit").is_err());
    }
}
