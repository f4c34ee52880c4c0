//! Testers for zero-field models on forests.

use std::collections::VecDeque;

use super::localization::{max_pair, pair_witness, Reference};
use super::verdict::{Algorithm, Promise, TestVerdict, Witness, WitnessKind};
use super::{log_n, sample_count, scale_counts};
use crate::config::TesterConfig;
use crate::error::{Error, Result};
use crate::estimation::{empirical_moments, MomentSource, MomentTable};
use crate::model::IsingModel;
use crate::sampling::SampleSource;

/// An empirical correlation this large already certifies a strong edge.
pub const LARGE_MARGINAL: f64 = 0.95;

/// `max{cosh^4 beta, min{beta^2, (tanh beta - tanh(beta - 1/(2 tanh beta)))^-2}}`.
pub fn forest_constant(beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    let b = beta.abs();
    let t = b.tanh();
    let gap = t - (b - 1.0 / (2.0 * t)).tanh();
    b.cosh().powi(4).max((b * b).min(1.0 / (gap * gap)))
}

/// Exact pairwise correlations of a zero-field forest model: the product of
/// `tanh theta` along the connecting path, zero across components.
pub fn forest_correlations(q: &IsingModel) -> Result<MomentTable> {
    let flags = q.classify();
    if !flags.is_forest || !flags.is_zero_field {
        return Err(Error::InvalidModel("forest correlations need a zero-field forest".into()));
    }
    let n = q.n();
    let mut table = vec![0.0; n * n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        let row = &mut table[root * n..(root + 1) * n];
        row[root] = 1.0;
        let mut seen = vec![false; n];
        seen[root] = true;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &(v, t) in q.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    row[v] = row[u] * t.tanh();
                    queue.push_back(v);
                }
            }
        }
    }
    MomentTable::from_marginals(vec![0.0; n], table, MomentSource::Exact)
}

/// Rejects iff some `|mu_uv| >= (1/2) sqrt(eps / n)` (or some `|mu_uv| >= 0.95`),
/// from `k = c_f n ln n / eps` samples. Assumes a zero-field forest.
pub fn test_independence_forest(source: &mut dyn SampleSource, config: &TesterConfig) -> Result<TestVerdict> {
    config.validate()?;
    let alg = Algorithm::ForestIndependence;
    let n = source.n();
    let eps = config.epsilon;
    if n < 2 {
        return Ok(TestVerdict::accept(alg, 0.0, 0, Promise::Assumed, config));
    }
    let k = sample_count(config.constants.c_f * n as f64 * log_n(n) / eps)?;
    let k = scale_counts(&[k], config.budget_override)[0];
    let moments = empirical_moments(&source.draw(k)?)?;
    let zero = MomentTable::uniform(n);
    let top = max_pair(&moments, Reference::Identity(&zero)).expect("n >= 2");
    let threshold = (0.5 * (eps / n as f64).sqrt()).min(LARGE_MARGINAL);
    Ok(if top.value >= threshold {
        TestVerdict::reject(alg, pair_witness(top, threshold), top.value, k, Promise::Assumed, config)
    } else {
        TestVerdict::accept(alg, top.value, k, Promise::Assumed, config)
    })
}

/// Rejects iff some `|mu_uv - mu^q_uv| >= (sech^2 beta / 2) sqrt(eps / n)`,
/// from `k = c_f c(beta) n ln n / eps` samples. A reference that is not a
/// zero-field forest is rejected outright.
pub fn test_identity_forest(source: &mut dyn SampleSource, q: &IsingModel, config: &TesterConfig) -> Result<TestVerdict> {
    config.validate()?;
    let alg = Algorithm::ForestIdentity;
    let n = source.n();
    if q.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.n() });
    }
    let flags = q.classify();
    if !flags.is_forest || !flags.is_zero_field {
        let w = Witness { kind: WitnessKind::Promise, identifier: vec![], observed: 1.0, threshold: 0.0 };
        return Ok(TestVerdict::reject(alg, w, 1.0, 0, Promise::Violated, config));
    }
    if n < 2 {
        return Ok(TestVerdict::accept(alg, 0.0, 0, Promise::Confirmed, config));
    }
    let beta = config.beta.unwrap_or(q.beta());
    let eps = config.epsilon;
    let k = sample_count(config.constants.c_f * forest_constant(beta) * n as f64 * log_n(n) / eps)?;
    let k = scale_counts(&[k], config.budget_override)[0];
    let reference = forest_correlations(q)?;
    let moments = empirical_moments(&source.draw(k)?)?;
    let top = max_pair(&moments, Reference::Identity(&reference)).expect("n >= 2");
    let sech2 = 1.0 / beta.cosh().powi(2);
    let threshold = 0.5 * sech2 * (eps / n as f64).sqrt();
    Ok(if top.value >= threshold {
        TestVerdict::reject(alg, pair_witness(top, threshold), top.value, k, Promise::Confirmed, config)
    } else {
        TestVerdict::accept(alg, top.value, k, Promise::Confirmed, config)
    })
}
