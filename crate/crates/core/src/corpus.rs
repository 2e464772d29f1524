//! The circuit corpus: fixture circuits under `corpus/`, each paired with a
//! reference oracle written directly on integers.
//!
//! `corpus/manifest.txt` lists one entry per line as `name file oracle`,
//! where the oracle is one of `and`, `xor`, `or`, `not`, `mux`,
//! `identity:N`, `parity:N`, `add:W`, `lt:W`, `eq:W`, `mul:W`, `toy-prg:N`.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bits::Bits;
use crate::circuits::{parse_circuit, Circuit, CircuitError};

/// Exhaustive checks stop above this many input bits.
pub const MAX_VERIFY_INPUTS: usize = 10;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
    #[error("{name}: {source}")]
    Circuit {
        name: String,
        #[source]
        source: CircuitError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub path: PathBuf,
    pub oracle: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryReport {
    pub name: String,
    pub inputs_checked: usize,
    /// Inputs on which circuit and oracle disagree (first few only).
    pub mismatches: Vec<Bits>,
    pub problem: Option<String>,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.problem.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusReport {
    pub entries: Vec<EntryReport>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(EntryReport::passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.entries.iter().filter(|e| !e.passed()).map(|e| e.name.as_str()).collect()
    }
}

/// The corpus directory shipped with the workspace.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn io_err(path: &Path, e: std::io::Error) -> CorpusError {
    CorpusError::Io { path: path.display().to_string(), msg: e.to_string() }
}

pub fn read_manifest(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let path = dir.join("manifest.txt");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(CorpusError::Manifest { line: i + 1, msg: "expected `name file oracle`".into() });
        }
        out.push(CorpusEntry { name: parts[0].into(), path: dir.join(parts[1]), oracle: parts[2].into() });
    }
    Ok(out)
}

pub fn load_circuit(entry: &CorpusEntry) -> Result<Circuit, CorpusError> {
    let text = fs::read_to_string(&entry.path).map_err(|e| io_err(&entry.path, e))?;
    parse_circuit(&text).map_err(|source| CorpusError::Circuit { name: entry.name.clone(), source })
}

/// Every entry with its parsed circuit.
pub fn load(dir: &Path) -> Result<Vec<(CorpusEntry, Circuit)>, CorpusError> {
    read_manifest(dir)?
        .into_iter()
        .map(|e| {
            let c = load_circuit(&e)?;
            Ok((e, c))
        })
        .collect()
}

type OracleFn = Box<dyn Fn(u64) -> u64>;

/// Reference oracle on big-endian integers: `(n_inputs, n_outputs, f)`.
pub fn reference_oracle(spec: &str) -> Option<(usize, usize, OracleFn)> {
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a.parse::<usize>().ok()?)),
        None => (spec, None),
    };
    let mask = |w: usize| (1u64 << w) - 1;
    Some(match (kind, arg) {
        ("and", None) => (2, 1, Box::new(|x| (x == 3) as u64)),
        ("xor", None) => (2, 1, Box::new(|x| (x == 1 || x == 2) as u64)),
        ("or", None) => (2, 1, Box::new(|x| (x != 0) as u64)),
        ("not", None) => (1, 1, Box::new(|x| x ^ 1)),
        ("mux", None) => (3, 1, Box::new(|x| if x & 4 != 0 { x & 1 } else { (x >> 1) & 1 })),
        ("identity", Some(n)) => (n, n, Box::new(|x| x)),
        ("parity", Some(n)) => (n, 1, Box::new(|x: u64| (x.count_ones() & 1) as u64)),
        ("add", Some(w)) => (2 * w, w + 1, Box::new(move |x| (x >> w) + (x & mask(w)))),
        ("lt", Some(w)) => (2 * w, 1, Box::new(move |x| ((x >> w) < (x & mask(w))) as u64)),
        ("eq", Some(w)) => (2 * w, 1, Box::new(move |x| ((x >> w) == (x & mask(w))) as u64)),
        ("mul", Some(w)) => (2 * w, 2 * w, Box::new(move |x| (x >> w) * (x & mask(w)))),
        ("toy-prg", Some(n)) if n >= 3 => (n, 2 * n, Box::new(move |x| toy_prg_words(x, n))),
        _ => return None,
    })
}

/// Word-level restatement of the toy generator: two rounds of
/// `s_i ← s_i ⊕ (s_{i+1} ∧ s_{i+2+round}) ⊕ [i + round ≡ 0 mod 3]`,
/// bit 0 being the most significant.
fn toy_prg_words(seed: u64, n: usize) -> u64 {
    let bit = |s: u64, i: usize| (s >> (n - 1 - (i % n))) & 1;
    let mut state = seed;
    let mut out = 0u64;
    for round in 0..2 {
        let mut next = 0u64;
        for i in 0..n {
            let v = bit(state, i) ^ (bit(state, i + 1) & bit(state, i + 2 + round)) ^ ((i + round) % 3 == 0) as u64;
            next = (next << 1) | v;
        }
        out = (out << n) | next;
        state = next;
    }
    out
}

fn verify_entry(entry: &CorpusEntry) -> EntryReport {
    let mut report = EntryReport { name: entry.name.clone(), inputs_checked: 0, mismatches: Vec::new(), problem: None };
    let c = match load_circuit(entry) {
        Ok(c) => c,
        Err(e) => {
            report.problem = Some(e.to_string());
            return report;
        }
    };
    let Some((n_in, n_out, f)) = reference_oracle(&entry.oracle) else {
        report.problem = Some(format!("unknown oracle `{}`", entry.oracle));
        return report;
    };
    if c.n_inputs() != n_in || c.n_outputs() != n_out {
        report.problem = Some(format!("shape {}→{} but oracle expects {n_in}→{n_out}", c.n_inputs(), c.n_outputs()));
        return report;
    }
    if n_in > MAX_VERIFY_INPUTS {
        report.problem = Some(format!("{n_in} inputs exceeds the exhaustive cap"));
        return report;
    }
    for v in 0..(1u64 << n_in) {
        let x = Bits::from_u64(v, n_in);
        report.inputs_checked += 1;
        let got = c.eval(&x).expect("shape checked");
        if got != Bits::from_u64(f(v), n_out) && report.mismatches.len() < 8 {
            report.mismatches.push(x);
        }
    }
    report
}

/// Checks every corpus entry exhaustively against its oracle.
pub fn corpus_verify(dir: &Path) -> Result<CorpusReport, CorpusError> {
    Ok(CorpusReport { entries: read_manifest(dir)?.iter().map(verify_entry).collect() })
}
