//! Line-based circuit text format.
//!
//! ```text
//! # 2-input AND
//! inputs 2
//! outputs 1
//! gate AND 0 1 -> 2
//! out 2
//! ```
//!
//! `out` may appear on several lines; wires accumulate in order.

use std::fmt::Write as _;

use super::{Circuit, CircuitError, Gate, GateOp};

pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut n_inputs: Option<usize> = None;
    let mut n_outputs: Option<usize> = None;
    let mut gates = Vec::new();
    let mut outputs = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CircuitError::Syntax { line: line_no, msg };
        let num = |tok: &str| -> Result<usize, CircuitError> {
            tok.parse::<usize>().map_err(|_| err(format!("expected a wire number, found {tok:?}")))
        };
        let mut toks = line.split_whitespace();
        let kw = toks.next().unwrap();
        match kw {
            "inputs" | "outputs" => {
                let rest: Vec<&str> = toks.collect();
                if rest.len() != 1 {
                    return Err(err(format!("`{kw}` takes exactly one count")));
                }
                let v = num(rest[0])?;
                let slot = if kw == "inputs" { &mut n_inputs } else { &mut n_outputs };
                if slot.replace(v).is_some() {
                    return Err(err(format!("duplicate `{kw}` header")));
                }
            }
            "gate" => {
                if n_inputs.is_none() {
                    return Err(err("gate before `inputs` header".into()));
                }
                let op_tok = toks.next().ok_or_else(|| err("missing gate op".into()))?;
                let op = GateOp::from_name(op_tok).ok_or_else(|| err(format!("unknown gate op {op_tok:?}")))?;
                let rest: Vec<&str> = toks.collect();
                let arrow = rest.iter().position(|t| *t == "->").ok_or_else(|| err("missing `->`".into()))?;
                let ins = rest[..arrow].iter().map(|t| num(t)).collect::<Result<Vec<_>, _>>()?;
                let outs = rest[arrow + 1..].iter().map(|t| num(t)).collect::<Result<Vec<_>, _>>()?;
                if ins.len() != op.arity() {
                    return Err(err(format!("{op} takes {} inputs, found {}", op.arity(), ins.len())));
                }
                if outs.len() != 1 {
                    return Err(err("a gate defines exactly one output wire".into()));
                }
                gates.push(Gate { op, a: ins[0], b: *ins.get(1).unwrap_or(&ins[0]), out: outs[0] });
            }
            "out" => {
                for t in toks {
                    outputs.push(num(t)?);
                }
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }

    let n_inputs = n_inputs.ok_or(CircuitError::Syntax { line: 0, msg: "missing `inputs` header".into() })?;
    let n_outputs = n_outputs.ok_or(CircuitError::Syntax { line: 0, msg: "missing `outputs` header".into() })?;
    if outputs.len() != n_outputs {
        return Err(CircuitError::Arity { expected: n_outputs, got: outputs.len() });
    }
    Circuit::new(n_inputs, gates, outputs)
}

pub fn emit_circuit(c: &Circuit) -> String {
    let mut s = String::new();
    writeln!(s, "inputs {}", c.n_inputs()).unwrap();
    writeln!(s, "outputs {}", c.n_outputs()).unwrap();
    for g in c.gates() {
        if g.op == GateOp::Not {
            writeln!(s, "gate NOT {} -> {}", g.a, g.out).unwrap();
        } else {
            writeln!(s, "gate {} {} {} -> {}", g.op, g.a, g.b, g.out).unwrap();
        }
    }
    s.push_str("out");
    for w in c.outputs() {
        write!(s, " {w}").unwrap();
    }
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_and_gate() {
        let c = parse_circuit("inputs 2\noutputs 1\ngate AND 0 1 -> 2\nout 2\n").unwrap();
        assert_eq!(c.n_inputs(), 2);
        assert_eq!(c.eval(&Bits::parse("11").unwrap()).unwrap().to_string(), "1");
    }

    #[test]
    fn undefined_wire_is_topology_error() {
        let r = parse_circuit("inputs 2\noutputs 1\ngate AND 0 5 -> 2\nout 2\n");
        assert!(matches!(r, Err(CircuitError::Topology(_))));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let r = parse_circuit("inputs 2\noutputs 1\n# fine\ngate NAND 0 1 -> 2\nout 2\n");
        assert!(matches!(r, Err(CircuitError::Syntax { line: 4, .. })));
        let r = parse_circuit("inputs 2\noutputs 1\ngate AND 0 -> 2\nout 2\n");
        assert!(matches!(r, Err(CircuitError::Syntax { line: 3, .. })));
    }

    #[test]
    fn output_count_must_match_header() {
        let r = parse_circuit("inputs 1\noutputs 2\nout 0\n");
        assert!(matches!(r, Err(CircuitError::Arity { .. })));
    }

    fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
        let n = rng.gen_range(1..6);
        let g = rng.gen_range(0..20);
        let ops = [GateOp::And, GateOp::Xor, GateOp::Or, GateOp::Not];
        let mut gates = Vec::new();
        for i in 0..g {
            let avail = n + i;
            let op = ops[rng.gen_range(0..4)];
            let a = rng.gen_range(0..avail);
            let b = if op == GateOp::Not { a } else { rng.gen_range(0..avail) };
            gates.push(Gate { op, a, b, out: avail });
        }
        let outs = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..n + g)).collect();
        Circuit::new(n, gates, outs).unwrap()
    }

    #[test]
    fn parse_emit_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let c = random_circuit(&mut rng);
            assert_eq!(parse_circuit(&emit_circuit(&c)).unwrap(), c);
        }
    }
}
