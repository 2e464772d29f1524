use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sfslab_core::circuits::{builders, BoolFunction, NativeFn};
use sfslab_core::seed::seed_from_u64;
use sfslab_core::Bits;
use sfslab_protocols::adversaries::{
    check_interference_identity, expander, run_soundness_experiment, server_adversary, ExperimentProtocol,
    ExperimentSpec, ToyInput, SERVER_ADVERSARIES,
};
use sfslab_protocols::runtime::{Channel, ProtocolError};
use sfslab_protocols::sfs::{run_sfs, RoundFailure, SfsParams, Stage, TestKind};
use sfslab_protocols::succ_test::AokBackend;

fn spec(protocol: &str) -> ExperimentSpec {
    ExperimentSpec::new(ExperimentProtocol::parse(protocol).unwrap(), 8, 64, 16)
}

#[test]
fn honest_server_always_passes() {
    let r = run_soundness_experiment(&spec("sfs-test"), "honest", 300, &seed_from_u64(1)).unwrap();
    // d_inpad = 0 has probability 2^-16 per round.
    assert_eq!(r.combined.passes, 300);
    assert_eq!(r.estimate(), 1.0);
}

#[test]
fn copying_server_passes_three_quarters() {
    let r = run_soundness_experiment(&spec("sfs-test"), "copying", 800, &seed_from_u64(2)).unwrap();
    assert!((r.estimate() - 0.75).abs() < 0.06, "{r:?}");
    assert_eq!(r.breakdown["computational"].estimate, 1.0);
    assert!((r.breakdown["hadamard"].estimate - 0.5).abs() < 0.09, "{r:?}");
}

#[test]
fn single_branch_server_passes_three_quarters() {
    let r = run_soundness_experiment(&spec("sfs-test"), "single-branch", 800, &seed_from_u64(3)).unwrap();
    assert!((r.estimate() - 0.75).abs() < 0.06, "{r:?}");
    assert_eq!(r.breakdown["computational"].estimate, 1.0);
}

#[test]
fn garbage_reply_fails_every_computation_round() {
    let r = run_soundness_experiment(&spec("sfs-comp"), "garbage-comp", 100, &seed_from_u64(4)).unwrap();
    assert_eq!(r.combined.passes, 0);
}

#[test]
fn witness_swap_fails_at_the_second_argument() {
    for kind in [TestKind::Computational, TestKind::Hadamard] {
        let f = expander(6, 32);
        let mut params = SfsParams::for_fn(f.as_ref(), 8).with_stage(Stage::Test);
        params.force_test = Some(kind);
        let adv = server_adversary("witness-swap").unwrap();
        for i in 0..20 {
            let run = run_sfs(&Channel::InProcess, &params, f.clone(), adv.clone(), &seed_from_u64(i)).unwrap();
            assert!(!run.client.flag);
            match run.client.first_failure().unwrap() {
                RoundFailure::InpadZero => {}
                other => assert_eq!(other, RoundFailure::Test { kind, phase: 2 }),
            }
        }
    }
}

#[test]
fn witness_swap_is_caught_by_the_merkle_backend_too() {
    let f = expander(4, 24);
    let mut params =
        SfsParams::for_fn(f.as_ref(), 8).with_stage(Stage::Test).with_backend(AokBackend::MerkleOracle { k: 16 });
    params.force_test = Some(TestKind::Computational);
    let adv = server_adversary("witness-swap").unwrap();
    let caught = (0..20)
        .filter(|&i| {
            !run_sfs(&Channel::InProcess, &params, f.clone(), adv.clone(), &seed_from_u64(i)).unwrap().client.flag
        })
        .count();
    assert_eq!(caught, 20);
}

#[test]
fn schedule_rejection_grows_with_test_count() {
    let r = run_soundness_experiment(&spec("sfs-schedule:4"), "copying", 600, &seed_from_u64(5)).unwrap();
    let expected = 0.75f64.powi(4);
    assert!((r.estimate() - expected).abs() < 0.07, "{r:?}");
}

#[test]
fn reports_are_reproducible() {
    let s = spec("sfs-test");
    let a = run_soundness_experiment(&s, "copying", 64, &seed_from_u64(9)).unwrap();
    let b = run_soundness_experiment(&s, "copying", 64, &seed_from_u64(9)).unwrap();
    assert_eq!(a.to_json_line(), b.to_json_line());
    let c = run_soundness_experiment(&s, "copying", 64, &seed_from_u64(10)).unwrap();
    assert_ne!(a.to_json_line(), c.to_json_line());
}

#[test]
fn report_interval_contains_estimate() {
    let r = run_soundness_experiment(&spec("sfs-test-hadamard"), "copying", 50, &seed_from_u64(6)).unwrap();
    assert!(r.combined.contains(r.estimate()));
    assert_eq!(r.breakdown.len(), 1);
    for t in r.breakdown.values() {
        assert!(t.contains(t.estimate));
    }
}

#[test]
fn unknown_adversary_is_rejected() {
    let err = run_soundness_experiment(&spec("sfs-test"), "nobody", 1, &seed_from_u64(0)).unwrap_err();
    assert!(matches!(err, ProtocolError::UnknownAdversary(_)));
    for name in SERVER_ADVERSARIES {
        server_adversary(name).unwrap();
    }
}

#[test]
fn interference_holds_for_honest_toy_state() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let f = builders::identity(2);
    let r = check_interference_identity(&f, ToyInput::Honest, 20, &mut rng).unwrap();
    assert!(r.pass_deviation <= 1e-10 && r.fail_deviation <= 1e-10, "{r:?}");
}

#[test]
fn interference_fails_for_single_branch_input() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let f = builders::identity(2);
    let r = check_interference_identity(&f, ToyInput::SingleBranch, 20, &mut rng).unwrap();
    assert!(r.pass_deviation >= 0.1 && r.fail_deviation >= 0.1, "{r:?}");
}

#[test]
fn interference_holds_for_constant_function() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let f = NativeFn::new("const", 3, 4, |_| Bits::parse("1010").unwrap());
    let r = check_interference_identity(&f, ToyInput::Honest, 30, &mut rng).unwrap();
    assert!(r.pass_deviation <= 1e-10 && r.fail_deviation <= 1e-10, "{r:?}");
}

#[test]
fn interference_refuses_oversized_inputs() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let f: Arc<dyn BoolFunction> = expander(4, 2);
    assert!(check_interference_identity(f.as_ref(), ToyInput::Honest, 1, &mut rng).is_err());
    let f = expander(3, 10);
    assert!(check_interference_identity(f.as_ref(), ToyInput::Honest, 1, &mut rng).is_err());
}
