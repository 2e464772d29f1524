//! Monte-Carlo soundness experiments with seeded, parallel trials.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use sfslab_core::circuits::{BoolFunction, NativeFn};
use sfslab_core::primitives::prg_expand;
use sfslab_core::seed::{self, Seed};

use super::strategies::server_adversary;
use crate::runtime::{Channel, ProtocolError};
use crate::sfs::{run_sfs, Mode, SfsParams, Stage, TestKind};
use crate::succ_test::AokBackend;

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `passes` out of `trials`.
pub fn wilson_interval(passes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = passes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tally {
    pub trials: u64,
    pub passes: u64,
    pub estimate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl Tally {
    pub fn new(trials: u64, passes: u64) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(passes, trials);
        Self {
            trials,
            passes,
            estimate: if trials == 0 { 0.0 } else { passes as f64 / trials as f64 },
            wilson_low,
            wilson_high,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.wilson_low <= p && p <= self.wilson_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub protocol: String,
    pub adversary: String,
    pub combined: Tally,
    /// Per round kind: how many rounds of that kind ran and how many passed.
    pub breakdown: BTreeMap<String, Tally>,
}

impl ExperimentReport {
    pub fn trials(&self) -> u64 {
        self.combined.trials
    }

    pub fn estimate(&self) -> f64 {
        self.combined.estimate
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// What each trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentProtocol {
    /// One SFS test round of a uniformly random kind.
    SfsTest,
    /// One SFS test round of a fixed kind.
    SfsTestKind(TestKind),
    /// One SFS computation round.
    SfsComp,
    /// `tests` test rounds then one computation round.
    SfsSchedule { tests: usize },
}

impl ExperimentProtocol {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sfs-test" => Some(Self::SfsTest),
            "sfs-test-hadamard" => Some(Self::SfsTestKind(TestKind::Hadamard)),
            "sfs-test-computational" => Some(Self::SfsTestKind(TestKind::Computational)),
            "sfs-comp" => Some(Self::SfsComp),
            _ => s.strip_prefix("sfs-schedule:").and_then(|t| t.parse().ok()).map(|tests| Self::SfsSchedule { tests }),
        }
    }

    fn stage(self) -> Stage {
        match self {
            Self::SfsTest | Self::SfsTestKind(_) => Stage::Test,
            Self::SfsComp => Stage::Comp,
            Self::SfsSchedule { tests } => Stage::Schedule { tests },
        }
    }
}

impl fmt::Display for ExperimentProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SfsTest => f.write_str("sfs-test"),
            Self::SfsTestKind(k) => write!(f, "sfs-test-{}", k.name()),
            Self::SfsComp => f.write_str("sfs-comp"),
            Self::SfsSchedule { tests } => write!(f, "sfs-schedule:{tests}"),
        }
    }
}

/// A protocol together with the instance it runs on.
#[derive(Clone)]
pub struct ExperimentSpec {
    pub protocol: ExperimentProtocol,
    pub kappa: usize,
    pub backend: AokBackend,
    pub f: Arc<dyn BoolFunction>,
}

impl ExperimentSpec {
    /// Instance over a pseudorandom expander `{0,1}^n -> {0,1}^m`.
    pub fn new(protocol: ExperimentProtocol, n: usize, m: usize, kappa: usize) -> Self {
        Self { protocol, kappa, backend: AokBackend::Reveal, f: expander(n, m) }
    }

    pub fn with_function(mut self, f: Arc<dyn BoolFunction>) -> Self {
        self.f = f;
        self
    }

    pub fn with_backend(mut self, backend: AokBackend) -> Self {
        self.backend = backend;
        self
    }

    fn params(&self) -> SfsParams {
        let mut p =
            SfsParams::for_fn(self.f.as_ref(), self.kappa).with_stage(self.protocol.stage()).with_backend(self.backend);
        if let ExperimentProtocol::SfsTestKind(k) = self.protocol {
            p.force_test = Some(k);
        }
        p
    }
}

/// A pseudorandom function with `n` input and `m` output bits.
pub fn expander(n: usize, m: usize) -> Arc<dyn BoolFunction> {
    Arc::new(NativeFn::new(format!("expand-{n}-{m}"), n, m, move |x| prg_expand(x, m)))
}

struct TrialResult {
    pass: bool,
    rounds: Vec<(String, bool)>,
}

fn mode_key(mode: Mode) -> String {
    match mode {
        Mode::Test(k) => k.name().to_string(),
        Mode::Comp => "comp".to_string(),
    }
}

/// Runs `trials` independent sessions of `spec` against the named server
/// adversary. Trial `i` uses the seed derived from `seed` at index `i`, so
/// reports do not depend on scheduling.
pub fn run_soundness_experiment(
    spec: &ExperimentSpec,
    adversary: &str,
    trials: u64,
    seed: &Seed,
) -> Result<ExperimentReport, ProtocolError> {
    let strategy = server_adversary(adversary)?;
    let params = spec.params();
    params.validate(spec.f.as_ref())?;
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive_indexed(seed, "trial", i);
            let run = run_sfs(&Channel::InProcess, &params, spec.f.clone(), strategy.clone(), &s)?;
            Ok(TrialResult {
                pass: run.client.flag,
                rounds: run.client.rounds.iter().map(|r| (mode_key(r.mode), r.pass)).collect(),
            })
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;

    let passes = results.iter().filter(|r| r.pass).count() as u64;
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (key, pass) in results.iter().flat_map(|r| r.rounds.iter()) {
        let e = counts.entry(key.clone()).or_default();
        e.0 += 1;
        e.1 += *pass as u64;
    }
    Ok(ExperimentReport {
        protocol: spec.protocol.to_string(),
        adversary: adversary.to_string(),
        combined: Tally::new(trials, passes),
        breakdown: counts.into_iter().map(|(k, (t, p))| (k, Tally::new(t, p))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_reference_values() {
        // 75 of 100: the textbook interval is about [0.6569, 0.8245].
        let (lo, hi) = wilson_interval(75, 100);
        assert!((lo - 0.6569).abs() < 1e-3 && (hi - 0.8245).abs() < 1e-3, "{lo} {hi}");
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 1e-3);
    }

    #[test]
    fn protocol_names_roundtrip() {
        for s in ["sfs-test", "sfs-test-hadamard", "sfs-test-computational", "sfs-comp", "sfs-schedule:8"] {
            assert_eq!(ExperimentProtocol::parse(s).unwrap().to_string(), s);
        }
        assert!(ExperimentProtocol::parse("sfs").is_none());
    }
}
