//! Random sparse-state programs replayed against the dense reference simulator.
//!
//! Each program starts from a random few-branch state over a handful of
//! registers and applies up to 20 random operations. After every operation
//! the sparse state, expanded to a dense vector, must equal the dense
//! simulator's state. Before every measurement the sparse sampler is run
//! repeatedly on the pre-measurement state and its outcome counts are scored
//! against the dense outcome distribution with a chi-square statistic.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfslab_core::circuits::{Circuit, Gate, GateOp};
use sfslab_core::qsim::dense::DenseState;
use sfslab_core::qsim::{Branch, QsimError, RegisterLayout, SparseState};
use sfslab_core::Bits;

pub const MAX_QUBITS: usize = 12;
pub const MAX_OPS: usize = 20;

#[derive(Debug, Default, Clone, Copy)]
pub struct ProgramStats {
    pub ops: usize,
    pub measurements: usize,
    pub chi2: f64,
    pub dof: usize,
    pub nonuniform_confirmed: usize,
}

impl ProgramStats {
    pub fn absorb(&mut self, other: &ProgramStats) {
        self.ops += other.ops;
        self.measurements += other.measurements;
        self.chi2 += other.chi2;
        self.dof += other.dof;
        self.nonuniform_confirmed += other.nonuniform_confirmed;
    }
}

fn random_circuit(rng: &mut ChaCha8Rng, n_in: usize, n_out: usize) -> Circuit {
    let ops = [GateOp::And, GateOp::Xor, GateOp::Or, GateOp::Not];
    let n_gates = rng.gen_range(0..8);
    let mut gates = Vec::new();
    for i in 0..n_gates {
        let avail = n_in + i;
        let op = ops[rng.gen_range(0..ops.len())];
        let a = rng.gen_range(0..avail);
        let b = rng.gen_range(0..avail);
        gates.push(Gate { op, a, b, out: avail });
    }
    let outs = (0..n_out).map(|_| rng.gen_range(0..n_in + n_gates)).collect();
    Circuit::new(n_in, gates, outs).expect("generated topologically")
}

fn pick_regs<'a>(rng: &mut ChaCha8Rng, layout: &'a RegisterLayout, max: usize) -> Vec<&'a str> {
    let names: Vec<&str> = layout.segments().iter().map(|s| s.name.as_str()).collect();
    let want = rng.gen_range(1..=max.min(names.len()));
    let mut picked: Vec<&str> = Vec::new();
    while picked.len() < want {
        let n = names[rng.gen_range(0..names.len())];
        if !picked.contains(&n) {
            picked.push(n);
        }
    }
    picked
}

fn compare(sparse: &SparseState, dense: &DenseState, what: &str) -> Result<(), String> {
    let expanded = DenseState::from_sparse(sparse).map_err(|e| e.to_string())?;
    let diff = expanded.max_abs_diff(dense);
    if diff > 1e-9 {
        return Err(format!("{what}: sparse and dense states differ by {diff}"));
    }
    Ok(())
}

fn chi_square(counts: &[usize], probs: &[f64], samples: usize) -> Result<(f64, usize), String> {
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (c, p) in counts.iter().zip(probs) {
        let expected = p * samples as f64;
        if *p < 1e-12 {
            if *c > 0 {
                return Err("sampled an outcome of probability zero".into());
            }
            continue;
        }
        if expected < 5.0 {
            pooled_obs += *c as f64;
            pooled_exp += expected;
            continue;
        }
        stat += (*c as f64 - expected).powi(2) / expected;
        bins += 1;
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    Ok((stat, bins.saturating_sub(1)))
}

fn index_of(bits: &Bits) -> usize {
    bits.iter().fold(0usize, |acc, b| (acc << 1) | b as usize)
}

/// Runs one random program. `samples` repetitions of each measurement feed
/// the distribution statistic.
pub fn run_program(seed: u64, samples: usize) -> Result<ProgramStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = ProgramStats::default();

    let mut layout = RegisterLayout::default();
    let mut total = 0;
    for i in 0..rng.gen_range(2..=4) {
        let w = rng.gen_range(1..=3);
        if total + w > 9 {
            break;
        }
        layout.push(&format!("r{i}"), w).unwrap();
        total += w;
    }
    let k = [1, 2, 2, 2, 3, 4][rng.gen_range(0..6)].min(1 << total);
    let mut bases: Vec<Bits> = Vec::new();
    while bases.len() < k {
        let b = Bits::random(&mut rng, total);
        if !bases.contains(&b) {
            bases.push(b);
        }
    }
    let branches = bases.into_iter().map(|b| Branch::new(b, rng.gen())).collect();
    let mut sparse = SparseState::new(layout, branches).map_err(|e| e.to_string())?;
    let mut dense = DenseState::from_sparse(&sparse).map_err(|e| e.to_string())?;
    let mut fresh = 0;

    for step in 0..rng.gen_range(1..=MAX_OPS) {
        if sparse.layout().segments().is_empty() {
            break;
        }
        stats.ops += 1;
        let layout = sparse.layout().clone();
        let width = layout.total_width();
        match rng.gen_range(0..6) {
            0 => {
                // classical oracle from one or two registers into another
                if layout.segments().len() < 2 {
                    continue;
                }
                let ins = pick_regs(&mut rng, &layout, 2);
                let outs: Vec<&str> =
                    layout.segments().iter().map(|s| s.name.as_str()).filter(|n| !ins.contains(n)).collect();
                if outs.is_empty() {
                    continue;
                }
                let out = outs[rng.gen_range(0..outs.len())];
                let in_pos = layout.positions(&ins).unwrap();
                let out_pos = layout.positions(&[out]).unwrap();
                let f = random_circuit(&mut rng, in_pos.len(), out_pos.len());
                sparse.apply_classical_oracle(&f, &ins, out).map_err(|e| e.to_string())?;
                dense.apply_oracle(&f, &in_pos, &out_pos);
            }
            1 => {
                let mask = Bits::random(&mut rng, width);
                let pred = |b: &Bits| b.dot(&mask);
                sparse.apply_phase_flip(pred);
                dense.phase_flip(pred);
            }
            2 => {
                let src = pick_regs(&mut rng, &layout, 1)[0];
                let src_pos = layout.positions(&[src]).unwrap();
                if width + src_pos.len() > MAX_QUBITS {
                    continue;
                }
                let name = format!("a{fresh}");
                fresh += 1;
                sparse.append_register(&name, src_pos.len()).map_err(|e| e.to_string())?;
                sparse.copy_registers(&[src], &name).map_err(|e| e.to_string())?;
                dense.append_zero_qubits(src_pos.len()).map_err(|e| e.to_string())?;
                for (i, &q) in src_pos.iter().enumerate() {
                    dense.cnot(q, width + i);
                }
            }
            3 | 4 => {
                let hadamard = rng.gen_bool(0.5);
                let segs = pick_regs(&mut rng, &layout, 2);
                let pos = layout.positions(&segs).unwrap();
                if pos.len() > 6 {
                    continue;
                }
                stats.measurements += 1;
                let probs =
                    if hadamard { dense.hadamard_distribution(&pos) } else { dense.computational_distribution(&pos) };
                let mut counts = vec![0usize; probs.len()];
                let mut sampling_ok = true;
                let mut srng = ChaCha8Rng::seed_from_u64(seed ^ ((step as u64 + 1) << 40));
                for _ in 0..samples {
                    let r = if hadamard {
                        sparse.measure_hadamard(&segs, &mut srng)
                    } else {
                        sparse.measure_computational(&segs, &mut srng)
                    };
                    match r {
                        Ok((d, _)) => counts[index_of(&d)] += 1,
                        Err(QsimError::NonUniform) => sampling_ok = false,
                        Err(e) => return Err(e.to_string()),
                    }
                }
                if sampling_ok && samples > 0 {
                    let (c, dof) = chi_square(&counts, &probs, samples)?;
                    stats.chi2 += c;
                    stats.dof += dof;
                }

                let outcome = if hadamard {
                    sparse.measure_hadamard(&segs, &mut rng)
                } else {
                    sparse.measure_computational(&segs, &mut rng)
                };
                match outcome {
                    Ok((d, post)) => {
                        let cond =
                            if hadamard { dense.hadamard_conditional(&pos, &d) } else { dense.project(&pos, &d) };
                        let (p, post_dense) =
                            cond.ok_or_else(|| format!("step {step}: sparse outcome {d} has dense probability 0"))?;
                        if p <= 0.0 {
                            return Err("nonpositive probability".into());
                        }
                        sparse = post;
                        dense = post_dense;
                    }
                    Err(QsimError::NonUniform) => {
                        // Only legitimate when some outcome leaves unequal magnitudes.
                        let mut unequal = false;
                        for d in 0..probs.len() {
                            if probs[d] < 1e-12 {
                                continue;
                            }
                            let d = Bits::from_u64(d as u64, pos.len());
                            let (_, post) = dense.hadamard_conditional(&pos, &d).unwrap();
                            let mags: Vec<f64> =
                                post.amplitudes().iter().map(|a| a.abs()).filter(|a| *a > 1e-9).collect();
                            if mags.iter().any(|m| (m - mags[0]).abs() > 1e-9) {
                                unequal = true;
                            }
                        }
                        if !unequal {
                            return Err(format!("step {step}: spurious nonuniform report"));
                        }
                        stats.nonuniform_confirmed += 1;
                        return Ok(stats);
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
            _ => {
                let w = rng.gen_range(1..=2);
                if width + w > MAX_QUBITS {
                    continue;
                }
                let name = format!("a{fresh}");
                fresh += 1;
                sparse.append_register(&name, w).map_err(|e| e.to_string())?;
                dense.append_zero_qubits(w).map_err(|e| e.to_string())?;
            }
        }
        compare(&sparse, &dense, &format!("program {seed} step {step}"))?;
    }
    Ok(stats)
}
