//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the enumeration code of the crate.
#![allow(dead_code)]

use isingtest::IsingModel;
use rand::Rng;

pub fn spins(state: usize, n: usize) -> Vec<f64> {
    (0..n).map(|u| if state >> u & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

pub fn weight_exponent(model: &IsingModel, x: &[f64]) -> f64 {
    let n = model.n();
    let mut e = 0.0;
    for u in 0..n {
        e += model.node(u) * x[u];
        for v in u + 1..n {
            e += model.edge(u, v) * x[u] * x[v];
        }
    }
    e
}

/// Probabilities of all `2^n` states, bit `u` of the index giving spin `u`.
pub fn probabilities(model: &IsingModel) -> Vec<f64> {
    let n = model.n();
    let w: Vec<f64> = (0..1usize << n).map(|s| weight_exponent(model, &spins(s, n))).collect();
    let top = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = w.iter().map(|e| (e - top).exp()).sum();
    w.iter().map(|e| (e - top).exp() / z).collect()
}

pub fn pair_moment(model: &IsingModel, probs: &[f64], u: usize, v: usize) -> f64 {
    let n = model.n();
    probs.iter().enumerate().map(|(s, p)| p * spins(s, n)[u] * spins(s, n)[v]).sum()
}

pub fn node_moment(model: &IsingModel, probs: &[f64], u: usize) -> f64 {
    let n = model.n();
    probs.iter().enumerate().map(|(s, p)| p * spins(s, n)[u]).sum()
}

/// `sum_x (p(x) - q(x)) ln(p(x) / q(x))`.
pub fn brute_skl(p: &IsingModel, q: &IsingModel) -> f64 {
    let (a, b) = (probabilities(p), probabilities(q));
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x / y).ln()).sum()
}

pub fn brute_tv(p: &IsingModel, q: &IsingModel) -> f64 {
    let (a, b) = (probabilities(p), probabilities(q));
    0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Distance to the nearest product distribution of a zero-field model with
/// `sum_v |theta_uv| <= 2` at every node, where the minimum sits at the
/// uniform distribution: `sum_e theta_e E[x_u x_v]`.
pub fn independence_gap(model: &IsingModel) -> Option<f64> {
    let n = model.n();
    if (0..n).any(|u| model.node(u) != 0.0) {
        return None;
    }
    if (0..n).any(|u| (0..n).filter(|&v| v != u).map(|v| model.edge(u, v).abs()).sum::<f64>() > 2.0) {
        return None;
    }
    let probs = probabilities(model);
    Some(model.edges().map(|(u, v, t)| t * pair_moment(model, &probs, u, v)).sum())
}

pub fn random_model(rng: &mut impl Rng, n: usize, theta: f64, field: f64, density: f64) -> IsingModel {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < density {
                edges.push((u, v, rng.random_range(-theta..=theta)));
            }
        }
    }
    let fields = (0..n).map(|_| rng.random_range(-field..=field)).collect();
    IsingModel::from_edges(n, fields, &edges).unwrap()
}

/// Random forest: each node after the first joins an earlier node with probability `attach`.
pub fn random_forest(rng: &mut impl Rng, n: usize, theta: f64, attach: f64) -> IsingModel {
    let mut edges = Vec::new();
    for v in 1..n {
        if rng.random::<f64>() < attach {
            edges.push((rng.random_range(0..v), v, rng.random_range(-theta..=theta)));
        }
    }
    IsingModel::from_edges(n, vec![0.0; n], &edges).unwrap()
}

pub fn random_ferromagnet(rng: &mut impl Rng, n: usize, theta: f64, density: f64) -> IsingModel {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < density {
                edges.push((u, v, rng.random_range(0.0..=theta)));
            }
        }
    }
    IsingModel::from_edges(n, vec![0.0; n], &edges).unwrap()
}
