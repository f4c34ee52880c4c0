//! Global bilinear and linear statistics, variance and Dirichlet-form estimates.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::SignVector;
use crate::exact::{spin_of, state_probabilities};
use crate::model::{IsingModel, PairIndex};
use crate::sampling::{glauber_step, transition_matrix, SampleSource};

fn check_pairs(n: usize, signs: &SignVector) -> Result<()> {
    let m = PairIndex::new(n).len();
    if signs.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: signs.len() });
    }
    Ok(())
}

/// `sum_{u<v} c_uv x_u x_v`.
pub fn bilinear_statistic(x: &[i8], signs: &SignVector) -> Result<f64> {
    check_pairs(x.len(), signs)?;
    Ok(bilinear_unchecked(x, signs.values()))
}

#[inline]
pub(crate) fn bilinear_unchecked(x: &[i8], c: &[i8]) -> f64 {
    let n = x.len();
    let mut total = 0i64;
    let mut i = 0;
    for u in 0..n {
        let xu = i64::from(x[u]);
        let mut row = 0i64;
        for v in u + 1..n {
            row += i64::from(c[i] * x[v]);
            i += 1;
        }
        total += xu * row;
    }
    total as f64
}

/// `sum_{u<v} c_uv (x1_u - x2_u)(x1_v - x2_v)`.
pub fn centered_bilinear_statistic(x1: &[i8], x2: &[i8], signs: &SignVector) -> Result<f64> {
    if x1.len() != x2.len() {
        return Err(Error::DimensionMismatch { expected: x1.len(), got: x2.len() });
    }
    check_pairs(x1.len(), signs)?;
    Ok(centered_unchecked(x1, x2, signs.values()))
}

#[inline]
pub(crate) fn centered_unchecked(x1: &[i8], x2: &[i8], c: &[i8]) -> f64 {
    let n = x1.len();
    let d: Vec<i64> = (0..n).map(|u| i64::from(x1[u] - x2[u])).collect();
    let mut total = 0i64;
    let mut i = 0;
    for u in 0..n {
        let mut row = 0i64;
        for v in u + 1..n {
            row += i64::from(c[i]) * d[v];
            i += 1;
        }
        total += d[u] * row;
    }
    total as f64
}

/// `sum_v c_v (x_v - offset_v)`.
pub fn linear_statistic(x: &[i8], node_signs: &SignVector, offsets: &[f64]) -> Result<f64> {
    let n = x.len();
    for len in [node_signs.len(), offsets.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    Ok(x.iter()
        .zip(node_signs.values())
        .zip(offsets)
        .map(|((&xv, &c), &o)| f64::from(c) * (f64::from(xv) - o))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticReport {
    pub mean: f64,
    pub variance: f64,
    /// Configurations drawn.
    pub k_used: usize,
    pub reps: usize,
}

/// A statistic of one configuration or of two independent configurations.
pub enum Statistic<'a> {
    Single(Box<dyn Fn(&[i8]) -> f64 + 'a>),
    Paired(Box<dyn Fn(&[i8], &[i8]) -> f64 + 'a>),
}

impl<'a> Statistic<'a> {
    pub fn single(f: impl Fn(&[i8]) -> f64 + 'a) -> Self {
        Self::Single(Box::new(f))
    }

    pub fn paired(f: impl Fn(&[i8], &[i8]) -> f64 + 'a) -> Self {
        Self::Paired(Box::new(f))
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::Single(_) => 1,
            Self::Paired(_) => 2,
        }
    }
}

/// Mean and unbiased variance of `values`.
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = if values.len() < 2 {
        0.0
    } else {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)
    };
    (mean, var)
}

/// Sample mean and unbiased variance of a statistic over `reps` independent draws.
pub fn variance_estimate(statistic: &Statistic<'_>, source: &mut dyn SampleSource, reps: usize) -> Result<StatisticReport> {
    if reps < 2 {
        return Err(Error::InvalidParameter(format!("reps = {reps}; at least 2 are needed for a variance")));
    }
    let batch = source.draw(reps * statistic.arity())?;
    let values: Vec<f64> = match statistic {
        Statistic::Single(f) => batch.rows().map(|r| f(r)).collect(),
        Statistic::Paired(f) => (0..reps).map(|i| f(batch.row(2 * i), batch.row(2 * i + 1))).collect(),
    };
    let (mean, variance) = mean_variance(&values);
    Ok(StatisticReport { mean, variance, k_used: batch.k(), reps })
}

/// `(1/2) E[(f(x) - f(y))^2]` with `x` from `source` and `y` one Glauber step from `x`.
pub fn dirichlet_form_estimate<R: Rng + ?Sized>(
    model: &IsingModel,
    f: &dyn Fn(&[i8]) -> f64,
    source: &mut dyn SampleSource,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Empty("Dirichlet form sample count"));
    }
    if source.n() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), got: source.n() });
    }
    let batch = source.draw(k)?;
    let mut y = vec![0i8; model.n()];
    let mut total = 0.0;
    for x in batch.rows() {
        y.copy_from_slice(x);
        glauber_step(model, &mut y, rng);
        let d = f(x) - f(&y);
        total += d * d;
    }
    Ok(0.5 * total / k as f64)
}

/// Exact `Var_pi(f)` by enumeration.
pub fn exact_variance(model: &IsingModel, f: &dyn Fn(&[i8]) -> f64) -> Result<f64> {
    let (pi, _) = state_probabilities(model)?;
    let values = state_values(model.n(), f);
    let mean: f64 = pi.iter().zip(&values).map(|(p, v)| p * v).sum();
    Ok(pi.iter().zip(&values).map(|(p, v)| p * (v - mean) * (v - mean)).sum())
}

/// Exact Dirichlet form from the enumerated transition matrix.
pub fn exact_dirichlet_form(model: &IsingModel, f: &dyn Fn(&[i8]) -> f64) -> Result<f64> {
    let p = transition_matrix(model)?;
    let (pi, _) = state_probabilities(model)?;
    let values = state_values(model.n(), f);
    let s = pi.len();
    let mut total = 0.0;
    for x in 0..s {
        for u in 0..model.n() {
            let y = x ^ (1 << u);
            let d = values[x] - values[y];
            total += pi[x] * p[x * s + y] * d * d;
        }
    }
    Ok(0.5 * total)
}

fn state_values(n: usize, f: &dyn Fn(&[i8]) -> f64) -> Vec<f64> {
    let mut x = vec![0i8; n];
    (0..1usize << n)
        .map(|s| {
            for (u, xu) in x.iter_mut().enumerate() {
                *xu = spin_of(s, u);
            }
            f(&x)
        })
        .collect()
}

/// Absolute spectral gap `1 - max(|lambda_2|, |lambda_min|)` of the Glauber chain, `n <= 8`.
pub fn spectral_gap(model: &IsingModel) -> Result<f64> {
    let n = model.n();
    if n > 8 {
        return Err(Error::InvalidParameter(format!("spectral gap for n = {n} is too large (max 8)")));
    }
    let p = transition_matrix(model)?;
    let (pi, _) = state_probabilities(model)?;
    let s = pi.len();
    // Reversibility makes D^(1/2) P D^(-1/2) symmetric.
    let sym = DMatrix::from_fn(s, s, |x, y| {
        let a = (pi[x] / pi[y]).sqrt() * p[x * s + y];
        let b = (pi[y] / pi[x]).sqrt() * p[y * s + x];
        0.5 * (a + b)
    });
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    if eig.len() < 2 {
        return Ok(1.0);
    }
    let second = eig[1].abs().max(eig[eig.len() - 1].abs());
    Ok(1.0 - second)
}
