//! Empirical moments and weak learning of signs.
//!
//! Weak learning here means guessing the sign of a Rademacher mean from a
//! budget of `k` samples that is far below the `1/lambda^2` needed for
//! constant confidence. The majority vote still beats a coin flip by an
//! advantage of order `lambda * sqrt(k)`, which is all the bilinear tests need.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PairIndex;
use crate::sampling::SampleBatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    Exact,
    Empirical { k: usize },
}

/// Node marginals, pairwise marginals, and covariances of a model.
///
/// Tables are dense `n x n` and symmetric. The diagonal of the pairwise
/// table is `E[X_u^2] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub n: usize,
    pub node_marginals: Vec<f64>,
    pub edge_marginals: Vec<f64>,
    pub covariances: Vec<f64>,
    pub source: MomentSource,
}

impl MomentTable {
    pub fn from_marginals(node: Vec<f64>, edge: Vec<f64>, source: MomentSource) -> Result<Self> {
        let n = node.len();
        if edge.len() != n * n {
            return Err(Error::IncompleteMoments(format!(
                "pairwise table has {} entries, expected {}",
                edge.len(),
                n * n
            )));
        }
        const SLACK: f64 = 1e-12;
        if let Some(bad) = node.iter().chain(&edge).find(|m| !(m.abs() <= 1.0 + SLACK)) {
            return Err(Error::IncompleteMoments(format!("marginal {bad} outside [-1, 1]")));
        }
        let mut cov = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                cov[u * n + v] = edge[u * n + v] - node[u] * node[v];
            }
        }
        Ok(Self { n, node_marginals: node, edge_marginals: edge, covariances: cov, source })
    }

    /// Moments of the uniform distribution on `n` spins.
    pub fn uniform(n: usize) -> Self {
        let mut edge = vec![0.0; n * n];
        for u in 0..n {
            edge[u * n + u] = 1.0;
        }
        Self::from_marginals(vec![0.0; n], edge, MomentSource::Exact).expect("valid")
    }

    #[inline]
    pub fn node(&self, u: usize) -> f64 {
        self.node_marginals[u]
    }

    #[inline]
    pub fn edge(&self, u: usize, v: usize) -> f64 {
        self.edge_marginals[u * self.n + v]
    }

    #[inline]
    pub fn covariance(&self, u: usize, v: usize) -> f64 {
        self.covariances[u * self.n + v]
    }

    pub fn is_exact(&self) -> bool {
        self.source == MomentSource::Exact
    }
}

/// Empirical node and pairwise moments of a batch.
pub fn empirical_moments(batch: &SampleBatch) -> Result<MomentTable> {
    let (n, k) = (batch.n(), batch.k());
    if k == 0 {
        return Err(Error::Empty("sample batch"));
    }
    let mut node_sum = vec![0i64; n];
    let mut pair_sum = vec![0i64; n * n];
    for row in batch.rows() {
        for u in 0..n {
            let xu = i64::from(row[u]);
            node_sum[u] += xu;
            let base = u * n;
            for v in u + 1..n {
                pair_sum[base + v] += xu * i64::from(row[v]);
            }
        }
    }
    let kf = k as f64;
    let node: Vec<f64> = node_sum.iter().map(|&s| s as f64 / kf).collect();
    let mut edge = vec![0.0; n * n];
    for u in 0..n {
        edge[u * n + u] = 1.0;
        for v in u + 1..n {
            let m = pair_sum[u * n + v] as f64 / kf;
            edge[u * n + v] = m;
            edge[v * n + u] = m;
        }
    }
    MomentTable::from_marginals(node, edge, MomentSource::Empirical { k })
}

/// A vector of `+-1` signs, indexed by node or by unordered pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(bad as i64));
        }
        Ok(Self(values))
    }

    pub fn constant(len: usize, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        Self(vec![sign; len])
    }

    /// Signs of real values with `sign(0) = +1`.
    pub fn from_signs(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect())
    }

    /// Pair signs of the true covariance or marginal table, `sign(0) = +1`.
    pub fn from_pair_table(n: usize, table: &[f64]) -> Self {
        let idx = PairIndex::new(n);
        Self::from_signs(&idx.pairs().map(|(u, v)| table[u * n + v]).collect::<Vec<_>>())
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| coin(rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }
}

#[inline]
pub(crate) fn coin<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

/// Majority vote over `+-1` values; a zero sum is broken by a fair coin.
pub fn sign_guess<R: Rng + ?Sized>(values: &[i8], rng: &mut R) -> Result<i8> {
    if values.is_empty() {
        return Err(Error::Empty("sign_guess values"));
    }
    let sum: i64 = values.iter().map(|&v| i64::from(v)).sum();
    Ok(match sum.signum() {
        1 => 1,
        -1 => -1,
        _ => coin(rng),
    })
}

/// Turns paired draws `x ~ Rademacher(p)`, `y ~ Rademacher(q)` into draws
/// from `Rademacher(1/2 + (p - q)/2)`: emit `(x - y)/2` when they differ,
/// a fair coin otherwise.
pub fn recenter_stream<R: Rng + ?Sized>(x: &[i8], y: &[i8], rng: &mut R) -> Result<Vec<i8>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(&a, &b)| if a != b { (a - b) / 2 } else { coin(rng) })
        .collect())
}

/// How raw item observations are folded into a sign estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    /// Observations in `{-1, +1}` (or any real value) summed as is.
    Direct,
    /// Observations in `{-1, 0, +1}`; each zero is replaced by a fair coin first.
    Ternary,
}

/// Produces one joint observation of every item per call.
///
/// Items may be arbitrarily correlated; one call typically consumes one
/// (or two) full configurations and reports every pair at once.
pub trait ItemSource {
    fn num_items(&self) -> usize;
    fn observe(&mut self, out: &mut [f64]) -> Result<()>;
}

/// Per-item sample count `ceil(c_wl * n^(2 tau) / (eps/beta)^2)`.
pub fn weak_learn_sample_count(n: usize, tau: f64, eps_over_beta: f64, c_wl: f64) -> Result<usize> {
    if !(tau > 0.0 && tau <= 2.0) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must lie in (0, 2]")));
    }
    if !(eps_over_beta > 0.0) {
        return Err(Error::InvalidParameter(format!("eps/beta = {eps_over_beta} must be positive")));
    }
    let k = c_wl * (n as f64).powf(2.0 * tau) / (eps_over_beta * eps_over_beta);
    Ok((k.ceil() as usize).max(1))
}

/// Draws `k` joint observations and returns the sign of each item's
/// empirical mean, breaking exact ties with a fair coin.
pub fn weak_learn_sign_vector<S, R>(source: &mut S, k: usize, kind: ItemKind, rng: &mut R) -> Result<SignVector>
where
    S: ItemSource + ?Sized,
    R: Rng + ?Sized,
{
    let m = source.num_items();
    let mut sums = vec![0.0; m];
    let mut obs = vec![0.0; m];
    for _ in 0..k {
        source.observe(&mut obs)?;
        match kind {
            ItemKind::Direct => sums.iter_mut().zip(&obs).for_each(|(s, o)| *s += o),
            ItemKind::Ternary => {
                for (s, &o) in sums.iter_mut().zip(&obs) {
                    *s += if o == 0.0 { f64::from(coin(rng)) } else { o };
                }
            }
        }
    }
    Ok(SignVector(
        sums.iter()
            .map(|&s| {
                if s > 0.0 {
                    1
                } else if s < 0.0 {
                    -1
                } else {
                    coin(rng)
                }
            })
            .collect(),
    ))
}
