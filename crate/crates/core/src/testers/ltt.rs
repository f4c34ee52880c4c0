//! Learn-then-test: weakly learn a sign vector, then test the global
//! statistic it defines.
//!
//! Each phase runs three steps. A localization prefilter rejects when a
//! single item already deviates by more than `eps / (beta n^tau)`. Then `L`
//! independent weak-learning repetitions produce sign vectors. Finally one
//! shared sample set is split into groups and every sign vector's statistic
//! is tested by the median of its group means. The phase rejects if any
//! step rejects.
//!
//! With `n^a` items (a = 2 for pairs, a = 1 for nodes) and a variance bound
//! `sigma^2 = c_var n^s` on the statistic, the balancing choice is
//! `tau = (a + s) / 3`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::localization::{max_node, max_pair, node_witness, pair_witness, Reference};
use super::verdict::{Algorithm, Promise, TestVerdict, Witness, WitnessKind};
use super::{log_n, sample_count};
use crate::config::TesterConfig;
use crate::error::{Error, Result};
use crate::estimation::{empirical_moments, weak_learn_sample_count, weak_learn_sign_vector, ItemKind, ItemSource, MomentTable, SignVector};
use crate::model::{IsingModel, PairIndex};
use crate::rng::{self, substream};
use crate::sampling::{SampleBatch, SampleSource};
use crate::statistics::{bilinear_unchecked, centered_unchecked};

/// `tau = (2 + s) / 3` for a pair statistic with variance `O(n^s)`.
pub fn choose_tau(s: f64) -> f64 {
    choose_tau_for(2.0, s)
}

/// `tau = (a + s) / 3` for `n^a` items.
pub fn choose_tau_for(a: f64, s: f64) -> f64 {
    (a + s) / 3.0
}

#[derive(Debug, Clone, Copy)]
pub enum LttMode<'a> {
    /// Test whether `p` is a product distribution; `field` selects the
    /// centered two-sample statistic that cancels node fields.
    Independence { field: bool },
    /// Test whether `p = q`; `field` adds a node phase before the pair phase.
    Identity { q: &'a IsingModel, q_moments: &'a MomentTable, field: bool },
}

impl<'a> LttMode<'a> {
    /// Field variant iff the configuration declares a positive field bound.
    pub fn independence(config: &TesterConfig) -> Self {
        Self::Independence { field: config.field_bound.is_some_and(|h| h > 0.0) }
    }

    /// Field variant iff `q` has a field or the configuration declares one.
    pub fn identity(q: &'a IsingModel, q_moments: &'a MomentTable, config: &TesterConfig) -> Self {
        let field = q.field() > 0.0 || config.field_bound.is_some_and(|h| h > 0.0);
        Self::Identity { q, q_moments, field }
    }

    fn algorithm(&self) -> Algorithm {
        match self {
            Self::Independence { field: false } => Algorithm::LttIndependence,
            Self::Independence { field: true } => Algorithm::LttIndependenceField,
            Self::Identity { field: false, .. } => Algorithm::LttIdentity,
            Self::Identity { field: true, .. } => Algorithm::LttIdentityField,
        }
    }
}

/// The per-sample statistic whose mean is tested.
#[derive(Debug, Clone, Copy)]
pub enum StatisticMode<'a> {
    /// `sum c_uv x_u x_v`.
    Pairs,
    /// `(1/2) sum c_uv (x1_u - x2_u)(x1_v - x2_v)` over two samples.
    CenteredPairs,
    /// `sum c_uv (x_u x_v - offset_uv)`, offsets in pair order.
    PairsOffset(&'a [f64]),
    /// `sum c_v (x_v - offset_v)`.
    NodesOffset(&'a [f64]),
}

impl StatisticMode<'_> {
    pub fn samples_per_observation(&self) -> usize {
        match self {
            Self::CenteredPairs => 2,
            _ => 1,
        }
    }
}

/// Group layout and threshold of one Chebyshev decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPlan {
    /// Odd number of groups; the decision is the median group mean.
    pub groups: usize,
    /// Observations per group.
    pub group_size: usize,
    pub threshold: f64,
}

impl ChebyshevPlan {
    /// `groups = ceil(ln(1/delta))` rounded up to odd,
    /// `group_size = c_ch sigma^2 n^(2(a - tau)) / signal^2`,
    /// `threshold = c_sig signal / (4 n^(a - tau))`.
    pub fn new(n: usize, a: f64, tau: f64, signal: f64, variance_bound: f64, delta: f64, config: &TesterConfig) -> Result<Self> {
        if !(signal > 0.0 && variance_bound > 0.0 && delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter("Chebyshev plan needs positive signal and variance, delta in (0,1)".into()));
        }
        let c = &config.constants;
        let scale = (n as f64).powf(a - tau);
        let mut groups = ((1.0 / delta).ln().ceil() as usize).max(1);
        if groups % 2 == 0 {
            groups += 1;
        }
        let group_size = sample_count(c.c_ch * variance_bound * scale * scale / (signal * signal))?;
        Ok(Self { groups, group_size, threshold: c.c_sig * signal / (4.0 * scale) })
    }

    pub fn observations(&self) -> usize {
        self.groups * self.group_size
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevOutcome {
    pub reject: bool,
    pub median: f64,
    pub group_means: Vec<f64>,
}

/// Splits `values` into `groups` equal consecutive groups and rejects iff
/// the median group mean is at least `threshold`.
pub fn median_of_means_decision(values: &[f64], groups: usize, threshold: f64) -> Result<ChebyshevOutcome> {
    if groups == 0 || values.len() < groups {
        return Err(Error::InvalidParameter(format!("{} values cannot fill {groups} groups", values.len())));
    }
    let size = values.len() / groups;
    let group_means: Vec<f64> =
        values.chunks_exact(size).take(groups).map(|g| g.iter().sum::<f64>() / size as f64).collect();
    let mut sorted = group_means.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[groups / 2];
    Ok(ChebyshevOutcome { reject: median >= threshold, median, group_means })
}

/// Evaluates the statistic defined by `signs` on every observation of
/// `batch` and applies [`median_of_means_decision`] with the plan's layout.
pub fn chebyshev_decision(batch: &SampleBatch, signs: &SignVector, mode: StatisticMode<'_>, plan: &ChebyshevPlan) -> Result<ChebyshevOutcome> {
    let values = statistic_values(batch, signs, mode, plan.observations())?;
    median_of_means_decision(&values, plan.groups, plan.threshold)
}

fn statistic_values(batch: &SampleBatch, signs: &SignVector, mode: StatisticMode<'_>, count: usize) -> Result<Vec<f64>> {
    let n = batch.n();
    let spo = mode.samples_per_observation();
    if batch.k() < count * spo {
        return Err(Error::SourceExhausted { requested: count * spo, available: batch.k() });
    }
    let c = signs.values();
    let expected = match mode {
        StatisticMode::NodesOffset(_) => n,
        _ => PairIndex::new(n).len(),
    };
    if c.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: c.len() });
    }
    Ok(match mode {
        StatisticMode::Pairs => (0..count).map(|i| bilinear_unchecked(batch.row(i), c)).collect(),
        StatisticMode::CenteredPairs => {
            (0..count).map(|i| 0.5 * centered_unchecked(batch.row(2 * i), batch.row(2 * i + 1), c)).collect()
        }
        StatisticMode::PairsOffset(off) => {
            if off.len() != expected {
                return Err(Error::DimensionMismatch { expected, got: off.len() });
            }
            let shift: f64 = c.iter().zip(off).map(|(&s, &o)| f64::from(s) * o).sum();
            (0..count).map(|i| bilinear_unchecked(batch.row(i), c) - shift).collect()
        }
        StatisticMode::NodesOffset(off) => {
            if off.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: off.len() });
            }
            let shift: f64 = c.iter().zip(off).map(|(&s, &o)| f64::from(s) * o).sum();
            (0..count)
                .map(|i| batch.row(i).iter().zip(c).map(|(&x, &s)| f64::from(x * s)).sum::<f64>() - shift)
                .collect()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// Independence, uncentered pair products.
    Pairs,
    /// Independence, centered two-sample pair products.
    CenteredPairs,
    /// Identity, pair products against the reference marginals.
    PairsIdentity,
    /// Identity, node spins against the reference marginals.
    NodesIdentity,
}

impl PhaseKind {
    fn samples_per_observation(self) -> usize {
        if self == PhaseKind::CenteredPairs {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub kind: PhaseKind,
    pub tau: f64,
    pub repetitions: usize,
    /// Configurations for the prefilter; 0 when disabled.
    pub prefilter_samples: usize,
    /// Localization accuracy; items at half of it are flagged.
    pub prefilter_accuracy: f64,
    /// Observations per weak-learning repetition.
    pub weak_learn_samples: usize,
    pub chebyshev: ChebyshevPlan,
}

impl PhasePlan {
    /// Configurations consumed by this phase.
    pub fn total_samples(&self) -> usize {
        let spo = self.kind.samples_per_observation();
        self.prefilter_samples + spo * (self.repetitions * self.weak_learn_samples + self.chebyshev.observations())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LttPlan {
    pub algorithm: Algorithm,
    pub phases: Vec<PhasePlan>,
}

impl LttPlan {
    pub fn build(n: usize, mode: &LttMode<'_>, config: &TesterConfig) -> Result<Self> {
        config.validate()?;
        if n < 2 {
            return Err(Error::InvalidParameter("learn-then-test needs at least two nodes".into()));
        }
        let eps = config.epsilon;
        let c = &config.constants;
        let nf = n as f64;
        let (beta, h) = match mode {
            LttMode::Independence { .. } => (
                config.beta.ok_or_else(|| Error::InvalidParameter("this tester needs a bound on beta".into()))?,
                0.0,
            ),
            LttMode::Identity { q, q_moments, field } => {
                if q.n() != n || q_moments.n != n {
                    return Err(Error::DimensionMismatch { expected: n, got: q.n() });
                }
                if !q_moments.is_exact() {
                    return Err(Error::IncompleteMoments("identity testing needs exact reference moments".into()));
                }
                let h = if *field { config.field_bound.unwrap_or(q.field()) } else { 0.0 };
                (config.beta.unwrap_or(q.beta()), h)
            }
        };
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter("learn-then-test needs a positive beta bound".into()));
        }

        // (kind, a, s, signal, scale for weak learning and prefilter)
        let mut specs: Vec<(PhaseKind, f64, f64, f64, f64)> = Vec::new();
        match mode {
            LttMode::Independence { field: false } => specs.push((PhaseKind::Pairs, 2.0, 2.0, eps / beta, beta)),
            LttMode::Independence { field: true } => {
                specs.push((PhaseKind::CenteredPairs, 2.0, 2.0, eps / beta, beta))
            }
            LttMode::Identity { field: false, .. } => {
                specs.push((PhaseKind::PairsIdentity, 2.0, 2.0, eps / (2.0 * beta), beta))
            }
            LttMode::Identity { field: true, .. } => {
                if h > 0.0 {
                    specs.push((PhaseKind::NodesIdentity, 1.0, 1.0, eps / (2.0 * h), h));
                }
                specs.push((PhaseKind::PairsIdentity, 2.0, 3.0, eps / (2.0 * beta), beta));
            }
        }

        let mut raw = Vec::new();
        for &(kind, a, s, signal, scale) in &specs {
            let tau = match (kind, config.tau) {
                (PhaseKind::NodesIdentity, _) | (_, None) => choose_tau_for(a, s),
                (_, Some(t)) => t,
            };
            let reps = sample_count(c.c_rep * nf.powf(a - tau))?;
            let accuracy = eps / (scale * nf.powf(tau));
            let prefilter = if config.prefilter { sample_count(c.c_loc * log_n(n) / (accuracy * accuracy))? } else { 0 };
            let wl = weak_learn_sample_count(n, tau, eps / scale, c.c_wl)?;
            raw.push((kind, a, s, signal, tau, reps, accuracy, prefilter, wl));
        }
        let total_reps: usize = raw.iter().map(|r| r.5).sum();
        let delta = config.fail_prob / total_reps as f64;

        let mut phases = Vec::new();
        for (kind, a, s, signal, tau, reps, accuracy, prefilter, wl) in raw {
            let variance = c.c_var * nf.powf(s);
            phases.push(PhasePlan {
                kind,
                tau,
                repetitions: reps,
                prefilter_samples: prefilter,
                prefilter_accuracy: accuracy,
                weak_learn_samples: wl,
                chebyshev: ChebyshevPlan::new(n, a, tau, signal, variance, delta, config)?,
            });
        }
        let mut plan = Self { algorithm: mode.algorithm(), phases };
        if let Some(budget) = config.budget_override {
            plan.rescale(budget);
        }
        Ok(plan)
    }

    pub fn total_samples(&self) -> usize {
        self.phases.iter().map(PhasePlan::total_samples).sum()
    }

    fn rescale(&mut self, budget: usize) {
        let f = budget as f64 / self.total_samples() as f64;
        let scale = |x: usize| ((x as f64 * f).round() as usize).max(1);
        for p in &mut self.phases {
            if p.prefilter_samples > 0 {
                p.prefilter_samples = scale(p.prefilter_samples);
            }
            p.weak_learn_samples = scale(p.weak_learn_samples);
            p.chebyshev.group_size = scale(p.chebyshev.group_size);
        }
    }
}

/// Weak-learning observations drawn from a batch.
struct BatchItems<'a> {
    batch: SampleBatch,
    cursor: usize,
    kind: PhaseKind,
    /// Reference marginals for identity items, in item order.
    reference: &'a [f64],
    rng: rng::Rng,
}

impl ItemSource for BatchItems<'_> {
    fn num_items(&self) -> usize {
        match self.kind {
            PhaseKind::NodesIdentity => self.batch.n(),
            _ => PairIndex::new(self.batch.n()).len(),
        }
    }

    fn observe(&mut self, out: &mut [f64]) -> Result<()> {
        let n = self.batch.n();
        let spo = self.kind.samples_per_observation();
        if self.cursor + spo > self.batch.k() {
            return Err(Error::SourceExhausted { requested: spo, available: self.batch.k() - self.cursor });
        }
        let x = self.batch.row(self.cursor);
        match self.kind {
            PhaseKind::Pairs => {
                let mut i = 0;
                for u in 0..n {
                    for v in u + 1..n {
                        out[i] = f64::from(x[u] * x[v]);
                        i += 1;
                    }
                }
            }
            PhaseKind::CenteredPairs => {
                let y = self.batch.row(self.cursor + 1);
                let d: Vec<i8> = (0..n).map(|u| (x[u] - y[u]) / 2).collect();
                let mut i = 0;
                for u in 0..n {
                    for v in u + 1..n {
                        out[i] = f64::from(d[u] * d[v]);
                        i += 1;
                    }
                }
            }
            PhaseKind::PairsIdentity => {
                let mut i = 0;
                for u in 0..n {
                    for v in u + 1..n {
                        out[i] = recenter_one(x[u] * x[v], self.reference[i], &mut self.rng);
                        i += 1;
                    }
                }
            }
            PhaseKind::NodesIdentity => {
                for u in 0..n {
                    out[u] = recenter_one(x[u], self.reference[u], &mut self.rng);
                }
            }
        }
        self.cursor += spo;
        Ok(())
    }
}

/// `(x - y) / 2` with `y ~ Rademacher` of mean `mu`: a `{-1, 0, 1}` value whose
/// mean is half the offset of `x` from `mu`.
#[inline]
fn recenter_one(x: i8, mu: f64, rng: &mut rng::Rng) -> f64 {
    let y: i8 = if rng.random::<f64>() < 0.5 * (1.0 + mu) { 1 } else { -1 };
    f64::from((x - y) / 2)
}

fn high_temperature_promise(mode: &LttMode<'_>, config: &TesterConfig) -> Promise {
    if let LttMode::Identity { q, .. } = mode {
        if q.max_influence() >= 1.0 {
            return Promise::Violated;
        }
    }
    match (config.beta, config.max_degree) {
        (Some(b), Some(d)) if d as f64 * b.tanh() < 1.0 => Promise::Confirmed,
        (Some(_), Some(_)) => Promise::Violated,
        _ => Promise::Assumed,
    }
}

/// Runs the learn-then-test algorithm selected by `mode`.
pub fn test_learn_then_test(source: &mut dyn SampleSource, mode: LttMode<'_>, config: &TesterConfig) -> Result<TestVerdict> {
    let n = source.n();
    let plan = LttPlan::build(n, &mode, config)?;
    let promise = high_temperature_promise(&mode, config);
    let alg = plan.algorithm;
    let mut learn_rng = substream(config.rng_seed, 0);
    let mut used = 0usize;
    let mut best_ratio = f64::NEG_INFINITY;

    let (pair_ref, node_ref): (Vec<f64>, Vec<f64>) = match mode {
        LttMode::Identity { q_moments, .. } => (
            PairIndex::new(n).pairs().map(|(u, v)| q_moments.edge(u, v)).collect(),
            q_moments.node_marginals.clone(),
        ),
        LttMode::Independence { .. } => (Vec::new(), Vec::new()),
    };
    let q_moments = match mode {
        LttMode::Identity { q_moments, .. } => Some(q_moments),
        LttMode::Independence { .. } => None,
    };

    for (phase_idx, phase) in plan.phases.iter().enumerate() {
        let nodes = phase.kind == PhaseKind::NodesIdentity;

        if phase.prefilter_samples > 0 {
            let batch = source.draw(phase.prefilter_samples)?;
            used += batch.k();
            let m = empirical_moments(&batch)?;
            let t = phase.prefilter_accuracy / 2.0;
            let top = match (nodes, q_moments) {
                (true, _) => max_node(&m, &node_ref),
                (false, Some(q)) => max_pair(&m, Reference::Identity(q)),
                (false, None) => max_pair(&m, Reference::Independence),
            }
            .expect("n >= 2");
            if top.value >= t {
                let w = if nodes { node_witness(top, t) } else { pair_witness(top, t) };
                return Ok(TestVerdict::reject(alg, w, top.value / t, used, promise, config));
            }
        }

        let reference: &[f64] = if nodes { &node_ref } else { &pair_ref };
        let kind = match phase.kind {
            PhaseKind::Pairs => ItemKind::Direct,
            _ => ItemKind::Ternary,
        };
        let spo = phase.kind.samples_per_observation();
        let mut signs = Vec::with_capacity(phase.repetitions);
        for rep in 0..phase.repetitions {
            let batch = source.draw(phase.weak_learn_samples * spo)?;
            used += batch.k();
            let stream = 1 + (phase_idx * 1_000_000 + rep) as u64;
            let mut items = BatchItems { batch, cursor: 0, kind: phase.kind, reference, rng: substream(config.rng_seed, stream) };
            signs.push(weak_learn_sign_vector(&mut items, phase.weak_learn_samples, kind, &mut learn_rng)?);
        }

        let stat_mode = match phase.kind {
            PhaseKind::Pairs => StatisticMode::Pairs,
            PhaseKind::CenteredPairs => StatisticMode::CenteredPairs,
            PhaseKind::PairsIdentity => StatisticMode::PairsOffset(&pair_ref),
            PhaseKind::NodesIdentity => StatisticMode::NodesOffset(&node_ref),
        };
        let batch = source.draw(phase.chebyshev.observations() * spo)?;
        used += batch.k();
        let mut rejection: Option<(usize, f64)> = None;
        for (rep, gamma) in signs.iter().enumerate() {
            let out = chebyshev_decision(&batch, gamma, stat_mode, &phase.chebyshev)?;
            best_ratio = best_ratio.max(out.median / phase.chebyshev.threshold);
            if out.reject && rejection.is_none_or(|(_, m)| out.median > m) {
                rejection = Some((rep, out.median));
            }
        }
        if let Some((rep, median)) = rejection {
            let w = Witness {
                kind: WitnessKind::Statistic,
                identifier: vec![phase_idx, rep],
                observed: median,
                threshold: phase.chebyshev.threshold,
            };
            return Ok(TestVerdict::reject(alg, w, best_ratio, used, promise, config));
        }
    }
    Ok(TestVerdict::accept(alg, best_ratio, used, promise, config))
}
