use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sfslab_core::circuits::{builders, BitAlgebra, Circuit, CircuitBuilder};
use sfslab_core::primitives::HashFn;
use sfslab_core::seed::seed_from_u64;
use sfslab_core::Bits;
use sfslab_protocols::runtime::{Channel, Direction};
use sfslab_protocols::sfs::{Honest, Stage};
use sfslab_protocols::sfvp::{aok_rounds, client_adversary, run_sfvp, run_sfvp2, Sfvp2Params, Sfvp2Setup, SfvpParams};
use sfslab_protocols::succ_test::AokBackend;

/// `gates` mixing gates over `n` inputs; the last `m` wires are outputs.
fn mixer(n: usize, gates: usize, m: usize) -> Circuit {
    let mut b = CircuitBuilder::new(n);
    let mut wires = b.inputs();
    for g in 0..gates {
        let l = wires.len();
        let (x, y) = (wires[g % l].clone(), wires[(7 * g + 1) % l].clone());
        let w = if g % 3 == 0 { b.and(&x, &y) } else { b.xor(&x, &y) };
        wires.push(w);
    }
    let outs = wires[wires.len() - m..].to_vec();
    b.finish(&outs).unwrap()
}

fn params() -> SfvpParams {
    SfvpParams::new(8).with_stage(Stage::Schedule { tests: 2 })
}

#[test]
fn and_of_ones_reaches_the_server() {
    let c = builders::and2();
    let run =
        run_sfvp(&Channel::InProcess, &params(), &c, &Bits::parse("11").unwrap(), Arc::new(Honest), &seed_from_u64(1))
            .unwrap();
    assert!(run.client.flag && run.server.flag);
    assert_eq!(run.server.y.unwrap(), Bits::parse("1").unwrap());
}

#[test]
fn exhaustive_inputs_on_a_four_input_circuit() {
    let c = builders::ripple_adder(2);
    let p = SfvpParams::new(8).with_stage(Stage::Comp);
    for v in 0..16u64 {
        let x = Bits::from_u64(v, 4);
        let mut done = false;
        for attempt in 0..4 {
            let run =
                run_sfvp(&Channel::InProcess, &p, &c, &x, Arc::new(Honest), &seed_from_u64(100 * v + attempt)).unwrap();
            if run.server.flag {
                assert_eq!(run.server.y.unwrap(), c.eval(&x).unwrap(), "x = {x}");
                done = true;
                break;
            }
        }
        assert!(done);
    }
}

#[test]
fn forward_bytes_do_not_depend_on_circuit_size() {
    for backend in [AokBackend::Reveal, AokBackend::MerkleOracle { k: 16 }] {
        let p = params().with_backend(backend);
        let x = Bits::parse("1011").unwrap();
        let fwd: Vec<usize> = [(16, 4), (256, 4), (64, 64)]
            .iter()
            .map(|&(g, m)| {
                let c = mixer(4, g, m);
                let run = run_sfvp(&Channel::InProcess, &p, &c, &x, Arc::new(Honest), &seed_from_u64(3)).unwrap();
                assert!(run.server.flag);
                assert_eq!(run.server.y.unwrap(), c.eval(&x).unwrap());
                run.transcript.forward_bytes()
            })
            .collect();
        assert!(fwd.windows(2).all(|w| w[0] == w[1]), "{backend}: {fwd:?}");
    }
}

#[test]
fn output_length_leaves_merkle_transcript_unchanged() {
    let p = params().with_backend(AokBackend::MerkleOracle { k: 16 });
    let x = Bits::parse("0110").unwrap();
    let sizes: Vec<(usize, usize)> = [64, 1024]
        .iter()
        .map(|&m| {
            let c = mixer(4, m, m);
            let run = run_sfvp(&Channel::InProcess, &p, &c, &x, Arc::new(Honest), &seed_from_u64(4)).unwrap();
            (run.transcript.forward_bytes(), run.transcript.backward_bytes())
        })
        .collect();
    assert_eq!(sizes[0], sizes[1]);
}

#[test]
fn input_encoding_follows_the_sampling() {
    let c = builders::xor2();
    let run =
        run_sfvp(&Channel::InProcess, &params(), &c, &Bits::parse("10").unwrap(), Arc::new(Honest), &seed_from_u64(5))
            .unwrap();
    let t = &run.transcript;
    let ie = t.position("sfvp.input-encoding").unwrap();
    assert_eq!(ie, t.entries.len() - 1);
    assert_eq!(t.entries[ie].direction, Direction::ClientToServer);
    assert!(t.position("sfs.done").unwrap() < ie);
}

#[test]
fn test_stage_is_refused() {
    let c = builders::and2();
    let p = SfvpParams::new(8).with_stage(Stage::Test);
    assert!(run_sfvp(&Channel::InProcess, &p, &c, &Bits::parse("11").unwrap(), Arc::new(Honest), &seed_from_u64(0))
        .is_err());
}

#[test]
fn argument_round_count() {
    assert_eq!(aok_rounds(1.0, 4.0), 256.0);
    assert!((aok_rounds(0.5, 4.0) - 2048.0).abs() < 1e-9);
    let p = Sfvp2Params::new(SfvpParams::new(8));
    assert_eq!(p.rounds().unwrap(), (256.0f64 / 0.95f64.powi(3)).ceil() as usize);
    assert_eq!(p.clone().with_aok_cap(3).rounds().unwrap(), 3);
}

fn setup(x: &str, seed: u64) -> Sfvp2Setup {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Sfvp2Setup::new(Bits::parse(x).unwrap(), 8, &mut rng).unwrap()
}

#[test]
fn honest_sfvp2_delivers_a_hashed_value() {
    let c = builders::ripple_adder(2);
    let s = setup("1101", 1);
    let p = Sfvp2Params::new(params()).with_aok_cap(4);
    let run = run_sfvp2(
        &Channel::InProcess,
        &p,
        &c,
        &s,
        client_adversary("honest").unwrap(),
        Arc::new(Honest),
        &seed_from_u64(2),
    )
    .unwrap();
    assert!(run.client.flag && run.client.server_accepted && run.server.flag);
    let y = run.server.y.unwrap();
    assert_eq!(y, c.eval(&s.x).unwrap());
    assert_eq!(run.server.rounds_passed, 4);
    assert_eq!(run.transcript.count("sfvp2.aok-response"), 4);
}

#[test]
fn honest_sfvp2_with_merkle_backend() {
    let c = builders::and2();
    let s = setup("11", 2);
    let p = Sfvp2Params::new(params().with_backend(AokBackend::MerkleOracle { k: 16 })).with_aok_cap(2);
    let run = run_sfvp2(
        &Channel::InProcess,
        &p,
        &c,
        &s,
        client_adversary("honest").unwrap(),
        Arc::new(Honest),
        &seed_from_u64(3),
    )
    .unwrap();
    assert!(run.server.flag);
    assert_eq!(run.server.y.unwrap(), Bits::parse("1").unwrap());
}

#[test]
fn swapped_input_is_rejected_in_the_first_round() {
    let c = builders::ripple_adder(2);
    let p = Sfvp2Params::new(SfvpParams::new(8).with_stage(Stage::Comp)).with_aok_cap(8);
    let adv = client_adversary("input-swap").unwrap();
    let mut decided = 0;
    for i in 0..20 {
        let s = setup("0110", i);
        let run = run_sfvp2(&Channel::InProcess, &p, &c, &s, adv.clone(), Arc::new(Honest), &seed_from_u64(i)).unwrap();
        if !run.server.sfvp.flag {
            continue;
        }
        decided += 1;
        assert!(!run.server.flag);
        assert!(run.server.y.is_none());
        assert_eq!(run.server.rounds_passed, 0);
        assert!(!run.client.server_accepted);
        assert_eq!(run.transcript.count("sfvp2.abort"), 1);
    }
    assert!(decided >= 15);
}

#[test]
fn setup_rejects_a_wrong_opening() {
    let s = setup("1010", 9);
    let mut x = s.x.clone();
    x.set(0, !x.get(0));
    assert!(Sfvp2Setup::from_parts(x, s.r.clone(), s.public.clone()).is_err());
    assert!(Sfvp2Setup::from_parts(s.x.clone(), s.r.clone(), s.public.clone()).is_ok());
}

#[test]
fn hash_key_is_well_formed_on_the_wire() {
    let c = builders::and2();
    let s = setup("01", 4);
    let p = Sfvp2Params::new(params()).with_aok_cap(1);
    let run = run_sfvp2(
        &Channel::InProcess,
        &p,
        &c,
        &s,
        client_adversary("honest").unwrap(),
        Arc::new(Honest),
        &seed_from_u64(4),
    )
    .unwrap();
    let y = run.server.y.unwrap();
    assert_eq!(y, Bits::parse("0").unwrap());
    // key + two u32 fields, length prefix, then c of 64 bits with its prefix.
    let e = &run.transcript.entries[run.transcript.position("sfvp2.hash").unwrap()];
    assert_eq!(e.bytes, 5 + (4 + HashFn::new([0; 16], 1, 64).to_bytes().len()) + (4 + 8));
}
