//! Tester configuration and the explicit constants behind every threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multipliers for the sample-count and threshold formulas.
///
/// Defaults come from the calibration run described in the README
/// (null acceptance and far rejection both at least 0.9 at `n = 12`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Localization sample counts (`k = c_loc * ... * ln n / accuracy^2`).
    pub c_loc: f64,
    /// Forest and ferromagnetic sample counts.
    pub c_f: f64,
    /// Per-group sample count of the Chebyshev phase.
    pub c_ch: f64,
    /// Weak-learning sample count per repetition.
    pub c_wl: f64,
    /// Number of weak-learning repetitions, `L = c_rep * n^(2 - tau)`.
    pub c_rep: f64,
    /// Chebyshev rejection threshold multiplier.
    pub c_sig: f64,
    /// Multiplier on the assumed variance bound of the global statistic.
    pub c_var: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c_loc: 400.0, c_f: 32.0, c_ch: 4.0, c_wl: 1.0, c_rep: 1.0, c_sig: 4.0, c_var: 1.0 }
    }
}

impl Constants {
    fn validate(&self) -> Result<()> {
        let named = [
            ("c_loc", self.c_loc),
            ("c_f", self.c_f),
            ("c_ch", self.c_ch),
            ("c_wl", self.c_wl),
            ("c_rep", self.c_rep),
            ("c_sig", self.c_sig),
            ("c_var", self.c_var),
        ];
        for (name, value) in named {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {value} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TesterConfig {
    pub epsilon: f64,
    pub fail_prob: f64,
    pub constants: Constants,
    pub rng_seed: u64,
    /// Known bound on `max |theta_uv|`.
    pub beta: Option<f64>,
    /// Known bound on `max |theta_u|`.
    pub field_bound: Option<f64>,
    /// Known bound on the maximum degree.
    pub max_degree: Option<usize>,
    /// Known bound on the number of edges.
    pub edge_bound: Option<usize>,
    /// Total sample budget; replaces the formula counts, scaled proportionally across phases.
    pub budget_override: Option<usize>,
    /// Run the localization prefilter of the learn-then-test testers.
    pub prefilter: bool,
    /// Fixed `tau` for learn-then-test; chosen from the variance exponent when absent.
    pub tau: Option<f64>,
}

impl Default for TesterConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            fail_prob: 0.1,
            constants: Constants::default(),
            rng_seed: 0,
            beta: None,
            field_bound: None,
            max_degree: None,
            edge_bound: None,
            budget_override: None,
            prefilter: true,
            tau: None,
        }
    }
}

impl TesterConfig {
    pub fn new(epsilon: f64, rng_seed: u64) -> Self {
        Self { epsilon, rng_seed, ..Self::default() }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_field_bound(mut self, h: f64) -> Self {
        self.field_bound = Some(h);
        self
    }

    pub fn with_max_degree(mut self, d: usize) -> Self {
        self.max_degree = Some(d);
        self
    }

    pub fn with_edge_bound(mut self, m: usize) -> Self {
        self.edge_bound = Some(m);
        self
    }

    pub fn with_budget(mut self, k: usize) -> Self {
        self.budget_override = Some(k);
        self
    }

    pub fn with_constants(mut self, constants: Constants) -> Self {
        self.constants = constants;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if !(self.fail_prob > 0.0 && self.fail_prob < 1.0) {
            return Err(Error::InvalidParameter(format!("fail_prob = {} must lie in (0, 1)", self.fail_prob)));
        }
        for (name, v) in [("beta", self.beta), ("field_bound", self.field_bound)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameter(format!("{name} = {v} must be nonnegative")));
                }
            }
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau <= 2.0) {
                return Err(Error::InvalidParameter(format!("tau = {tau} must lie in (0, 2]")));
            }
        }
        if self.budget_override == Some(0) {
            return Err(Error::InvalidParameter("budget_override must be at least 1".into()));
        }
        self.constants.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
