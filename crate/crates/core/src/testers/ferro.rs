//! Independence tester for zero-field ferromagnets.

use super::localization::pair_witness;
use super::verdict::{Algorithm, Promise, TestVerdict};
use super::{log_n, sample_count, scale_counts, Flag};
use crate::config::TesterConfig;
use crate::error::Result;
use crate::estimation::empirical_moments;
use crate::model::PairIndex;
use crate::sampling::SampleSource;

/// Rejects iff some `mu_uv >= (1/2) sqrt(eps / (n d))`, from
/// `k = c_f n d ln n / eps` samples, where `d` is `config.max_degree` or `n`
/// when unknown. One-sided: ferromagnets only have nonnegative correlations.
pub fn test_independence_ferro(source: &mut dyn SampleSource, config: &TesterConfig) -> Result<TestVerdict> {
    config.validate()?;
    let alg = Algorithm::FerroIndependence;
    let n = source.n();
    if n < 2 {
        return Ok(TestVerdict::accept(alg, 0.0, 0, Promise::Assumed, config));
    }
    let d = config.max_degree.unwrap_or(n).max(1) as f64;
    let nf = n as f64;
    let eps = config.epsilon;
    let k = sample_count(config.constants.c_f * nf * d * log_n(n) / eps)?;
    let k = scale_counts(&[k], config.budget_override)[0];
    let moments = empirical_moments(&source.draw(k)?)?;
    let top = PairIndex::new(n)
        .pairs()
        .map(|(u, v)| Flag { item: (u, v), value: moments.edge(u, v) })
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("n >= 2");
    let threshold = 0.5 * (eps / (nf * d)).sqrt();
    Ok(if top.value >= threshold {
        TestVerdict::reject(alg, pair_witness(top, threshold), top.value, k, Promise::Assumed, config)
    } else {
        TestVerdict::accept(alg, top.value, k, Promise::Assumed, config)
    })
}
