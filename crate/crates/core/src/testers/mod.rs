//! Independence and identity testers.
//!
//! Every sample count and threshold is a formula with an explicit constant
//! from [`Constants`](crate::config::Constants). A configured
//! `budget_override` replaces the formula total and rescales each phase
//! proportionally.

pub mod ferro;
pub mod forest;
pub mod localization;
pub mod ltt;
pub mod verdict;

pub use ferro::test_independence_ferro;
pub use forest::{forest_constant, forest_correlations, test_identity_forest, test_independence_forest};
pub use localization::{
    flag_discrepant_nodes, flag_discrepant_pairs, test_identity_localization, test_independence_localization, Flag,
    Reference,
};
pub use ltt::{chebyshev_decision, choose_tau, test_learn_then_test, LttMode, LttPlan, StatisticMode};
pub use verdict::{Algorithm, Decision, Promise, TestVerdict, Witness, WitnessKind};

use crate::error::{Error, Result};

/// Largest per-phase sample count a formula may request.
pub const MAX_SAMPLES: f64 = 2e9;

/// `ln n`, floored at 1 so that tiny models still draw a sensible amount.
pub(crate) fn log_n(n: usize) -> f64 {
    (n as f64).ln().max(1.0)
}

pub(crate) fn sample_count(x: f64) -> Result<usize> {
    if !(x.is_finite() && x <= MAX_SAMPLES) {
        return Err(Error::InvalidParameter(format!("formula asks for {x:.3e} samples")));
    }
    Ok((x.ceil() as usize).max(1))
}

/// Rescales phase counts so that they sum to about `budget`, keeping every phase at least 1.
pub(crate) fn scale_counts(counts: &[usize], budget: Option<usize>) -> Vec<usize> {
    let Some(budget) = budget else {
        return counts.to_vec();
    };
    let total: usize = counts.iter().sum();
    let factor = budget as f64 / total as f64;
    counts.iter().map(|&c| ((c as f64 * factor).round() as usize).max(1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_scale_proportionally() {
        assert_eq!(scale_counts(&[100, 300], Some(40)), vec![10, 30]);
        assert_eq!(scale_counts(&[100, 300], None), vec![100, 300]);
        assert_eq!(scale_counts(&[1, 1000], Some(10)), vec![1, 10]);
    }

    #[test]
    fn absurd_counts_are_errors() {
        assert!(sample_count(1e12).is_err());
        assert!(sample_count(f64::INFINITY).is_err());
        assert_eq!(sample_count(0.2).unwrap(), 1);
    }
}
