//! Ising model representation.
//!
//! A model over `n` labeled nodes carries a dense symmetric table of edge
//! parameters and a vector of node parameters. Every pair of nodes is a
//! potential edge; a zero entry means the edge is absent. The sparse
//! neighbor lists used by single-site dynamics are derived once at
//! construction and the model is immutable afterwards.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of unordered node pairs `u < v` in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    n: usize,
}

impl PairIndex {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of the pair `{u, v}`; the order of the arguments does not matter.
    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        debug_assert!(u != v && u < self.n && v < self.n);
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    /// All pairs `(u, v)` with `u < v`, in index order.
    pub fn pairs(self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
    }
}

/// A configuration in `{-1, +1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(bad as i64));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Decodes a state index: bit `i` set means spin `i` is `+1`.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|i| if (index >> i) & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn flip(&mut self, u: usize) {
        self.0[u] = -self.0[u];
    }

    pub fn set(&mut self, u: usize, spin: i8) {
        debug_assert!(spin == 1 || spin == -1);
        self.0[u] = spin;
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

impl AsRef<[i8]> for SpinConfiguration {
    fn as_ref(&self) -> &[i8] {
        &self.0
    }
}

/// Structural classification of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFlags {
    pub is_forest: bool,
    pub is_ferromagnetic: bool,
    pub is_zero_field: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    edge_theta: Vec<f64>,
    node_theta: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl IsingModel {
    /// The model with all parameters zero (the uniform distribution).
    pub fn uniform(n: usize) -> Self {
        Self::from_dense(n, vec![0.0; n * n], vec![0.0; n])
    }

    /// A product model with the given node parameters and no edges.
    pub fn product(node_theta: Vec<f64>) -> Result<Self> {
        Self::from_edges(node_theta.len(), node_theta, &[])
    }

    /// Builds a model from node parameters and an edge list `(u, v, theta)`.
    ///
    /// Self-loops, out-of-range indices, duplicate pairs, and non-finite
    /// parameters are rejected.
    pub fn from_edges(n: usize, node_theta: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if node_theta.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: node_theta.len() });
        }
        if let Some(t) = node_theta.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite node parameter {t}")));
        }
        let mut dense = vec![0.0; n * n];
        let mut seen = vec![false; n * n];
        for &(u, v, theta) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidModel(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::InvalidModel(format!("self edge ({u}, {v})")));
            }
            if !theta.is_finite() {
                return Err(Error::InvalidModel(format!("non-finite edge parameter on ({u}, {v})")));
            }
            if seen[u * n + v] {
                return Err(Error::InvalidModel(format!("duplicate edge ({u}, {v})")));
            }
            seen[u * n + v] = true;
            seen[v * n + u] = true;
            dense[u * n + v] = theta;
            dense[v * n + u] = theta;
        }
        Ok(Self::from_dense(n, dense, node_theta))
    }

    fn from_dense(n: usize, edge_theta: Vec<f64>, node_theta: Vec<f64>) -> Self {
        let neighbors = (0..n)
            .map(|u| {
                (0..n)
                    .filter(|&v| v != u && edge_theta[u * n + v] != 0.0)
                    .map(|v| (v, edge_theta[u * n + v]))
                    .collect()
            })
            .collect();
        Self { n, edge_theta, node_theta, neighbors }
    }

    /// Returns a copy with the parameter of pair `{u, v}` replaced.
    pub fn with_edge(&self, u: usize, v: usize, theta: f64) -> Result<Self> {
        if u >= self.n || v >= self.n || u == v {
            return Err(Error::InvalidModel(format!("bad pair ({u}, {v})")));
        }
        let mut dense = self.edge_theta.clone();
        dense[u * self.n + v] = theta;
        dense[v * self.n + u] = theta;
        Ok(Self::from_dense(self.n, dense, self.node_theta.clone()))
    }

    /// Returns a copy with node parameters replaced.
    pub fn with_node_theta(&self, node_theta: Vec<f64>) -> Result<Self> {
        if node_theta.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: node_theta.len() });
        }
        Ok(Self::from_dense(self.n, self.edge_theta.clone(), node_theta))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge(&self, u: usize, v: usize) -> f64 {
        self.edge_theta[u * self.n + v]
    }

    #[inline]
    pub fn node(&self, u: usize) -> f64 {
        self.node_theta[u]
    }

    pub fn node_theta(&self) -> &[f64] {
        &self.node_theta
    }

    /// Nonzero neighbors of `u` with their edge parameters.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.neighbors[u]
    }

    /// Nonzero edges `(u, v, theta)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        PairIndex::new(self.n)
            .pairs()
            .map(|(u, v)| (u, v, self.edge(u, v)))
            .filter(|&(_, _, t)| t != 0.0)
    }

    /// Maximum absolute edge parameter.
    pub fn beta(&self) -> f64 {
        self.edge_theta.iter().fold(0.0, |m, t| m.max(t.abs()))
    }

    /// Maximum absolute node parameter.
    pub fn field(&self) -> f64 {
        self.node_theta.iter().fold(0.0, |m, t| m.max(t.abs()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Local field at `u` given the rest of `x`: `theta_u + sum_v theta_uv x_v`.
    #[inline]
    pub fn local_field(&self, x: &[i8], u: usize) -> f64 {
        self.neighbors[u]
            .iter()
            .fold(self.node_theta[u], |acc, &(v, t)| acc + t * f64::from(x[v]))
    }

    /// Unnormalized log-probability `sum_v theta_v x_v + sum_{u<v} theta_uv x_u x_v`.
    pub fn energy(&self, x: &[i8]) -> f64 {
        let mut e = 0.0;
        for u in 0..self.n {
            let xu = f64::from(x[u]);
            e += self.node_theta[u] * xu;
            for &(v, t) in &self.neighbors[u] {
                if v > u {
                    e += t * xu * f64::from(x[v]);
                }
            }
        }
        e
    }

    pub fn classify(&self) -> ModelFlags {
        ModelFlags {
            is_forest: self.is_forest(),
            is_ferromagnetic: self.edge_theta.iter().all(|&t| t >= 0.0),
            is_zero_field: self.node_theta.iter().all(|&t| t == 0.0),
        }
    }

    fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (u, v, _) in self.edges() {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
        }
        true
    }

    /// Largest Dobrushin row sum `max_v sum_{u != v} tanh |theta_uv|`.
    pub fn max_influence(&self) -> f64 {
        self.neighbors
            .iter()
            .map(|row| row.iter().map(|&(_, t)| t.abs().tanh()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// True iff the model satisfies Dobrushin's uniqueness condition with slack `eta`.
    pub fn dobrushin_check(&self, eta: f64) -> bool {
        self.max_influence() <= 1.0 - eta
    }

    pub fn to_file_format(&self) -> ModelFile {
        ModelFile {
            n: self.n,
            node_theta: self.node_theta.clone(),
            edges: self.edges().map(|(u, v, t)| (u, v, t)).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file_format())?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

impl fmt::Display for IsingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IsingModel(n={}, edges={}, beta={:.4}, h={:.4}, d_max={})",
            self.n,
            self.edge_count(),
            self.beta(),
            self.field(),
            self.max_degree()
        )
    }
}

/// On-disk JSON form: `{"n", "node_theta", "edges": [[u, v, theta], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub node_theta: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl ModelFile {
    /// Strict conversion: edges must be listed with `u < v`.
    pub fn into_model(self) -> Result<IsingModel> {
        if let Some(&(u, v, _)) = self.edges.iter().find(|(u, v, _)| u > v) {
            return Err(Error::InvalidModel(format!("edge ({u}, {v}) must be listed with u < v")));
        }
        IsingModel::from_edges(self.n, self.node_theta, &self.edges)
    }
}
