//! Exact quantities by full state enumeration (small `n` only).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{MomentSource, MomentTable};
use crate::model::{IsingModel, SpinConfiguration};

/// Largest `n` for which enumeration over `2^n` states is attempted.
pub const ENUMERATION_CUTOFF: usize = 20;

pub(crate) fn check_cutoff(n: usize) -> Result<()> {
    if n > ENUMERATION_CUTOFF {
        Err(Error::EnumerationCutoff { n, cutoff: ENUMERATION_CUTOFF })
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn spin_of(state: usize, u: usize) -> i8 {
    if (state >> u) & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Unnormalized log-weights of all `2^n` states, indexed so that bit `i`
/// of the index is spin `i` (set = `+1`). Walks a Gray code so each state
/// costs one local-field evaluation.
pub(crate) fn state_energies(model: &IsingModel) -> Result<Vec<f64>> {
    let n = model.n();
    check_cutoff(n)?;
    let states = 1usize << n;
    let mut energies = vec![0.0; states];
    let mut x = vec![-1i8; n];
    let mut energy = model.energy(&x);
    energies[0] = energy;
    for i in 1..states {
        let bit = i.trailing_zeros() as usize;
        let gray = i ^ (i >> 1);
        let old = f64::from(x[bit]);
        energy -= 2.0 * old * model.local_field(&x, bit);
        x[bit] = -x[bit];
        energies[gray] = energy;
    }
    Ok(energies)
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Normalized probabilities of all states together with the log-partition function.
pub fn state_probabilities(model: &IsingModel) -> Result<(Vec<f64>, f64)> {
    let mut energies = state_energies(model)?;
    let log_partition = log_sum_exp(&energies);
    for e in &mut energies {
        *e = (*e - log_partition).exp();
    }
    Ok((energies, log_partition))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub n: usize,
    /// Natural log of the partition function.
    pub log_partition: f64,
    pub node_marginals: Vec<f64>,
    /// Dense symmetric `n x n` table of `E[X_u X_v]`; the diagonal is 1.
    pub edge_marginals: Vec<f64>,
}

impl ExactSummary {
    pub fn edge_marginal(&self, u: usize, v: usize) -> f64 {
        self.edge_marginals[u * self.n + v]
    }

    pub fn covariance(&self, u: usize, v: usize) -> f64 {
        self.edge_marginal(u, v) - self.node_marginals[u] * self.node_marginals[v]
    }

    pub fn moments(&self) -> MomentTable {
        MomentTable::from_marginals(self.node_marginals.clone(), self.edge_marginals.clone(), MomentSource::Exact)
            .expect("exact marginals are consistent by construction")
    }
}

pub fn exact_summary(model: &IsingModel) -> Result<ExactSummary> {
    let n = model.n();
    let (probs, log_partition) = state_probabilities(model)?;
    let mut node = vec![0.0; n];
    let mut edge = vec![0.0; n * n];
    let mut spins = vec![0.0f64; n];
    for (state, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (u, s) in spins.iter_mut().enumerate() {
            *s = f64::from(spin_of(state, u));
        }
        for u in 0..n {
            let pu = p * spins[u];
            node[u] += pu;
            for v in u + 1..n {
                edge[u * n + v] += pu * spins[v];
            }
        }
    }
    for u in 0..n {
        edge[u * n + u] = 1.0;
        for v in u + 1..n {
            let m = edge[u * n + v].clamp(-1.0, 1.0);
            edge[u * n + v] = m;
            edge[v * n + u] = m;
        }
        node[u] = node[u].clamp(-1.0, 1.0);
    }
    Ok(ExactSummary { n, log_partition, node_marginals: node, edge_marginals: edge })
}

/// `log p(x)` given the model's log-partition function.
pub fn log_pmf(model: &IsingModel, x: &SpinConfiguration, log_partition: f64) -> Result<f64> {
    if x.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), got: x.len() });
    }
    Ok(model.energy(x.spins()) - log_partition)
}

fn check_same_n(p: &IsingModel, q: &IsingModel) -> Result<()> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), got: q.n() });
    }
    Ok(())
}

/// Symmetric KL divergence `sum_x (p(x) - q(x)) (log p(x) - log q(x))` by enumeration.
pub fn skl_direct(p: &IsingModel, q: &IsingModel) -> Result<f64> {
    check_same_n(p, q)?;
    let ep = state_energies(p)?;
    let eq = state_energies(q)?;
    let (zp, zq) = (log_sum_exp(&ep), log_sum_exp(&eq));
    Ok(ep
        .iter()
        .zip(&eq)
        .map(|(a, b)| {
            let (lp, lq) = (a - zp, b - zq);
            (lp.exp() - lq.exp()) * (lp - lq)
        })
        .sum())
}

/// Total variation distance by enumeration.
pub fn tv_direct(p: &IsingModel, q: &IsingModel) -> Result<f64> {
    check_same_n(p, q)?;
    let (pp, _) = state_probabilities(p)?;
    let (pq, _) = state_probabilities(q)?;
    Ok(0.5 * pp.iter().zip(&pq).map(|(a, b)| (a - b).abs()).sum::<f64>())
}
