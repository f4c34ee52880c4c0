//! Testers that blame a single node or pair.

use serde::{Deserialize, Serialize};

use super::verdict::{Algorithm, Promise, TestVerdict, Witness, WitnessKind};
use super::{log_n, sample_count, scale_counts};
use crate::config::TesterConfig;
use crate::error::{Error, Result};
use crate::estimation::{empirical_moments, MomentTable};
use crate::model::{IsingModel, PairIndex};
use crate::sampling::{SampleBatch, SampleSource};

/// What a pair's empirical moment is compared against.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// Covariance against zero.
    Independence,
    /// Pairwise marginal against a reference table.
    Identity(&'a MomentTable),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub item: (usize, usize),
    /// Absolute deviation from the reference.
    pub value: f64,
}

fn pair_deviation(m: &MomentTable, reference: Reference<'_>, u: usize, v: usize) -> f64 {
    match reference {
        Reference::Independence => m.covariance(u, v).abs(),
        Reference::Identity(q) => (m.edge(u, v) - q.edge(u, v)).abs(),
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold = {threshold} must be positive")));
    }
    Ok(())
}

/// Pairs whose deviation is at least `threshold / 2`.
///
/// With about `ln n / threshold^2` samples every pair whose true deviation is
/// at least `threshold` is flagged and no pair with zero deviation is.
pub fn flag_discrepant_pairs(batch: &SampleBatch, reference: Reference<'_>, threshold: f64) -> Result<Vec<Flag>> {
    check_threshold(threshold)?;
    let m = empirical_moments(batch)?;
    if let Reference::Identity(q) = reference {
        if q.n != m.n {
            return Err(Error::DimensionMismatch { expected: m.n, got: q.n });
        }
    }
    Ok(PairIndex::new(m.n)
        .pairs()
        .map(|(u, v)| Flag { item: (u, v), value: pair_deviation(&m, reference, u, v) })
        .filter(|f| f.value >= threshold / 2.0)
        .collect())
}

/// Nodes whose `|mu_u - reference_u|` is at least `threshold / 2`; the pair slot `item.1` repeats `u`.
pub fn flag_discrepant_nodes(batch: &SampleBatch, reference: &[f64], threshold: f64) -> Result<Vec<Flag>> {
    check_threshold(threshold)?;
    let m = empirical_moments(batch)?;
    if reference.len() != m.n {
        return Err(Error::DimensionMismatch { expected: m.n, got: reference.len() });
    }
    Ok((0..m.n)
        .map(|u| Flag { item: (u, u), value: (m.node(u) - reference[u]).abs() })
        .filter(|f| f.value >= threshold / 2.0)
        .collect())
}

/// Largest pair deviation.
pub(crate) fn max_pair(m: &MomentTable, reference: Reference<'_>) -> Option<Flag> {
    PairIndex::new(m.n)
        .pairs()
        .map(|(u, v)| Flag { item: (u, v), value: pair_deviation(m, reference, u, v) })
        .max_by(|a, b| a.value.total_cmp(&b.value))
}

pub(crate) fn max_node(m: &MomentTable, reference: &[f64]) -> Option<Flag> {
    (0..m.n)
        .map(|u| Flag { item: (u, u), value: (m.node(u) - reference[u]).abs() })
        .max_by(|a, b| a.value.total_cmp(&b.value))
}

pub(crate) fn pair_witness(f: Flag, threshold: f64) -> Witness {
    Witness { kind: WitnessKind::Edge, identifier: vec![f.item.0, f.item.1], observed: f.value, threshold }
}

pub(crate) fn node_witness(f: Flag, threshold: f64) -> Witness {
    Witness { kind: WitnessKind::Node, identifier: vec![f.item.0], observed: f.value, threshold }
}

fn require_beta(config: &TesterConfig) -> Result<f64> {
    config
        .beta
        .ok_or_else(|| Error::InvalidParameter("this tester needs a bound on beta".into()))
}

/// Rejects iff some `|lambda_uv| >= eps / (4 m beta)`, from
/// `k = c_loc m^2 beta^2 ln n / eps^2` samples.
///
/// `m` is `config.edge_bound`, or `n(n-1)/2` when unknown.
pub fn test_independence_localization(source: &mut dyn SampleSource, config: &TesterConfig) -> Result<TestVerdict> {
    config.validate()?;
    let alg = Algorithm::LocalizationIndependence;
    let n = source.n();
    let beta = require_beta(config)?;
    let m = config.edge_bound.unwrap_or(PairIndex::new(n).len()).max(1) as f64;
    let eps = config.epsilon;
    if beta == 0.0 || n < 2 {
        // No edge can carry weight.
        return Ok(TestVerdict::accept(alg, 0.0, 0, Promise::NotRequired, config));
    }
    let threshold = eps / (4.0 * m * beta);
    let k = sample_count(config.constants.c_loc * m * m * beta * beta * log_n(n) / (eps * eps))?;
    let k = scale_counts(&[k], config.budget_override)[0];
    let moments = empirical_moments(&source.draw(k)?)?;
    let top = max_pair(&moments, Reference::Independence).expect("n >= 2");
    Ok(if top.value >= threshold {
        TestVerdict::reject(alg, pair_witness(top, threshold), top.value, k, Promise::NotRequired, config)
    } else {
        TestVerdict::accept(alg, top.value, k, Promise::NotRequired, config)
    })
}

/// Rejects iff some `|mu_uv - mu^q_uv| >= eps / (8 m beta)` or some
/// `|mu_u - mu^q_u| >= eps / (8 n h)`, from
/// `k = c_loc (m^2 beta^2 + n^2 h^2) ln n / eps^2` samples.
///
/// `beta` and `h` default to those of `q`; the node phase is skipped when `h = 0`.
/// The reported statistic is the largest deviation divided by its threshold.
pub fn test_identity_localization(
    source: &mut dyn SampleSource,
    q: &IsingModel,
    q_moments: &MomentTable,
    config: &TesterConfig,
) -> Result<TestVerdict> {
    config.validate()?;
    let alg = Algorithm::LocalizationIdentity;
    let n = source.n();
    if q.n() != n || q_moments.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.n() });
    }
    if !q_moments.is_exact() {
        return Err(Error::IncompleteMoments("identity testing needs exact reference moments".into()));
    }
    let beta = config.beta.unwrap_or(q.beta());
    let h = config.field_bound.unwrap_or(q.field());
    if beta == 0.0 && h == 0.0 {
        return Err(Error::InvalidParameter(
            "reference has no edges or fields; give a beta bound for the alternative".into(),
        ));
    }
    let m = config.edge_bound.unwrap_or(PairIndex::new(n).len()).max(1) as f64;
    let nf = n as f64;
    let eps = config.epsilon;
    let k = sample_count(
        config.constants.c_loc * (m * m * beta * beta + nf * nf * h * h) * log_n(n) / (eps * eps),
    )?;
    let k = scale_counts(&[k], config.budget_override)[0];
    let moments = empirical_moments(&source.draw(k)?)?;

    let mut statistic: f64 = 0.0;
    if beta > 0.0 && n >= 2 {
        let t = eps / (8.0 * m * beta);
        let top = max_pair(&moments, Reference::Identity(q_moments)).expect("n >= 2");
        statistic = top.value / t;
        if top.value >= t {
            return Ok(TestVerdict::reject(alg, pair_witness(top, t), statistic, k, Promise::NotRequired, config));
        }
    }
    if h > 0.0 {
        let t = eps / (8.0 * nf * h);
        let top = max_node(&moments, &q_moments.node_marginals).expect("n >= 1");
        statistic = statistic.max(top.value / t);
        if top.value >= t {
            return Ok(TestVerdict::reject(alg, node_witness(top, t), statistic, k, Promise::NotRequired, config));
        }
    }
    Ok(TestVerdict::accept(alg, statistic, k, Promise::NotRequired, config))
}
