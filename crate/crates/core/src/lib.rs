//! Hypothesis testing for Ising models.
//!
//! The crate tests whether samples come from a product distribution
//! (independence) or from a given reference model (identity), with the
//! distance measured in symmetric KL divergence. It bundles:
//!
//! * [`model`] and [`exact`]: the model type, exact marginals and
//!   divergences by enumeration for `n <= 20`;
//! * [`sampling`]: exact inversion and Glauber dynamics samplers;
//! * [`estimation`] and [`statistics`]: empirical moments, weak sign
//!   learning, bilinear statistics, variance and Dirichlet-form estimates;
//! * [`testers`]: localization, forest, ferromagnetic and learn-then-test testers;
//! * [`hard`]: lower-bound instance families;
//! * [`harness`]: power-curve experiments with CSV output.

pub mod calibration;
pub mod config;
pub mod divergence;
pub mod error;
pub mod estimation;
pub mod exact;
pub mod hard;
pub mod harness;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod statistics;
pub mod testers;

pub use config::{Constants, TesterConfig};
pub use divergence::{skl_divergence, skl_independence_gap};
pub use error::{Error, Result};
pub use estimation::{empirical_moments, recenter_stream, sign_guess, weak_learn_sign_vector, MomentTable, SignVector};
pub use exact::{exact_summary, log_pmf, skl_direct, tv_direct, ExactSummary, ENUMERATION_CUTOFF};
pub use model::{IsingModel, ModelFlags, SpinConfiguration};
pub use sampling::{exact_draw, glauber_draw, glauber_step, GlauberConfig, SampleBatch, SampleSource};
pub use testers::{Decision, TestVerdict};
