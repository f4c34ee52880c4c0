use serde::{Deserialize, Serialize};

use crate::config::TesterConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    LocalizationIndependence,
    LocalizationIdentity,
    ForestIndependence,
    ForestIdentity,
    FerroIndependence,
    LttIndependence,
    LttIndependenceField,
    LttIdentity,
    LttIdentityField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_reject(self) -> bool {
        self == Decision::Reject
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Edge,
    Node,
    Statistic,
    /// The reference model breaks the tester's structural requirement.
    Promise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    /// Pair `[u, v]`, node `[u]`, or `[phase, repetition]` for a statistic.
    pub identifier: Vec<usize>,
    pub observed: f64,
    pub threshold: f64,
}

/// What is known about the structural assumption a tester relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Promise {
    NotRequired,
    /// Relied upon but not checkable from the inputs.
    Assumed,
    Confirmed,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub algorithm: Algorithm,
    pub decision: Decision,
    pub witness: Option<Witness>,
    /// The decisive test value. Single-threshold testers report the largest
    /// deviation; identity localization and learn-then-test report the
    /// largest value divided by its threshold.
    pub statistic: f64,
    pub samples_used: usize,
    pub seed: u64,
    pub promise: Promise,
    pub config: TesterConfig,
}

impl TestVerdict {
    pub(crate) fn accept(algorithm: Algorithm, statistic: f64, samples_used: usize, promise: Promise, config: &TesterConfig) -> Self {
        Self {
            algorithm,
            decision: Decision::Accept,
            witness: None,
            statistic,
            samples_used,
            seed: config.rng_seed,
            promise,
            config: config.clone(),
        }
    }

    pub(crate) fn reject(
        algorithm: Algorithm,
        witness: Witness,
        statistic: f64,
        samples_used: usize,
        promise: Promise,
        config: &TesterConfig,
    ) -> Self {
        Self {
            algorithm,
            decision: Decision::Reject,
            witness: Some(witness),
            statistic,
            samples_used,
            seed: config.rng_seed,
            promise,
            config: config.clone(),
        }
    }

    pub fn is_reject(&self) -> bool {
        self.decision.is_reject()
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
