//! Fixed desk-scale corpora (`n = 12`) used to pick the default constants.
//!
//! Every tester gets a null corpus, a far corpus and a configuration whose
//! `epsilon` is at most half the smallest distance of the far corpus.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;

use crate::config::{Constants, TesterConfig};
use crate::error::Result;
use crate::exact::exact_summary;
use crate::harness::{run_tester, TesterKind};
use crate::model::IsingModel;
use crate::rng::{derive_seed, seeded};
use crate::sampling::ExactSampler;

pub const DESK_N: usize = 12;

#[derive(Debug, Clone)]
pub struct DeskCorpus {
    pub tester: TesterKind,
    pub config: TesterConfig,
    pub reference: Option<IsingModel>,
    pub null: Vec<IsingModel>,
    pub far: Vec<IsingModel>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusRates {
    pub tester: TesterKind,
    pub null_accept: f64,
    pub far_reject: f64,
    pub mean_samples: f64,
    #[serde(skip)]
    pub elapsed: Duration,
}

fn random_sign(rng: &mut impl rand::Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Zero-field model with `count` disjoint edges of weight `+-theta` on random nodes.
fn disjoint_edges(n: usize, count: usize, theta: f64, seed: u64) -> Result<IsingModel> {
    let mut rng = seeded(seed);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);
    let edges: Vec<_> = nodes
        .chunks_exact(2)
        .take(count)
        .map(|p| (p[0].min(p[1]), p[0].max(p[1]), theta * random_sign(&mut rng)))
        .collect();
    IsingModel::from_edges(n, vec![0.0; n], &edges)
}

/// Random recursive tree: node `i` attaches to a uniform earlier node.
fn random_tree(n: usize, theta: f64, seed: u64) -> Result<IsingModel> {
    let mut rng = seeded(seed);
    let edges: Vec<_> = (1..n).map(|i| (rng.random_range(0..i), i, theta * random_sign(&mut rng))).collect();
    IsingModel::from_edges(n, vec![0.0; n], &edges)
}

/// Complete graph with weights `+-theta`.
fn dense_signed(n: usize, theta: f64, seed: u64) -> Result<IsingModel> {
    let mut rng = seeded(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v, theta * random_sign(&mut rng)));
        }
    }
    IsingModel::from_edges(n, vec![0.0; n], &edges)
}

/// Ferromagnetic cycle plus `chords` random chords, all of weight `theta`, degree at most 3.
fn ferro_cycle(n: usize, theta: f64, chords: usize, seed: u64) -> Result<IsingModel> {
    let mut rng = seeded(seed);
    let mut edges: Vec<_> = (0..n).map(|u| ((u).min((u + 1) % n), u.max((u + 1) % n), theta)).collect();
    let mut free: Vec<usize> = (0..n).collect();
    free.shuffle(&mut rng);
    for pair in free.chunks_exact(2).take(chords) {
        let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if v - u != 1 && v - u != n - 1 {
            edges.push((u, v, theta));
        }
    }
    IsingModel::from_edges(n, vec![0.0; n], &edges)
}

fn flip_edge(q: &IsingModel, index: usize) -> Result<IsingModel> {
    let (u, v, t) = q.edges().nth(index % q.edge_count()).expect("reference has edges");
    q.with_edge(u, v, -t)
}

/// The calibration corpus of one tester.
pub fn desk_corpus(kind: TesterKind, constants: Constants) -> Result<DeskCorpus> {
    let n = DESK_N;
    let base = |eps: f64| TesterConfig::new(eps, 0).with_constants(constants);
    let seeds = 0..5u64;
    let corpus = match kind {
        TesterKind::LocInd => {
            let null = seeds
                .clone()
                .map(|s| {
                    let mut rng = seeded(100 + s);
                    IsingModel::product((0..n).map(|_| rng.random_range(-0.5..=0.5)).collect())
                })
                .collect::<Result<_>>()?;
            let far = seeds.map(|s| disjoint_edges(n, 2, 0.5, 200 + s)).collect::<Result<_>>()?;
            DeskCorpus { tester: kind, config: base(0.2).with_beta(0.5).with_edge_bound(2), reference: None, null, far }
        }
        TesterKind::LocId => {
            let q = disjoint_edges(n, 3, 0.4, 300)?;
            let far = (0..3).map(|i| flip_edge(&q, i)).collect::<Result<_>>()?;
            DeskCorpus {
                tester: kind,
                config: base(0.3).with_beta(0.4).with_edge_bound(3),
                null: vec![q.clone()],
                reference: Some(q),
                far,
            }
        }
        TesterKind::ForestInd => {
            let far = seeds.map(|s| disjoint_edges(n, 3, 0.3, 400 + s)).collect::<Result<_>>()?;
            DeskCorpus { tester: kind, config: base(0.12), reference: None, null: vec![IsingModel::uniform(n)], far }
        }
        TesterKind::ForestId => {
            let q = random_tree(n, 0.4, 500)?;
            let far = (0..5).map(|i| flip_edge(&q, 2 * i)).collect::<Result<_>>()?;
            DeskCorpus { tester: kind, config: base(0.3), null: vec![q.clone()], reference: Some(q), far }
        }
        TesterKind::FerroInd => {
            let far = seeds.map(|s| ferro_cycle(n, 0.2, s as usize, 600 + s)).collect::<Result<_>>()?;
            DeskCorpus {
                tester: kind,
                config: base(0.2).with_max_degree(3),
                reference: None,
                null: vec![IsingModel::uniform(n)],
                far,
            }
        }
        TesterKind::LttInd => {
            let far = seeds.map(|s| dense_signed(n, 0.05, 700 + s)).collect::<Result<_>>()?;
            DeskCorpus {
                tester: kind,
                config: base(0.08).with_beta(0.05).with_max_degree(n - 1),
                reference: None,
                null: vec![IsingModel::uniform(n)],
                far,
            }
        }
        TesterKind::LttId => {
            let q = dense_signed(n, 0.05, 800)?;
            let far = seeds
                .map(|s| {
                    // Flip the sign of half the edges.
                    let mut rng = seeded(810 + s);
                    let mut p = q.clone();
                    for (u, v, t) in q.edges() {
                        if rng.random::<bool>() {
                            p = p.with_edge(u, v, -t)?;
                        }
                    }
                    Ok(p)
                })
                .collect::<Result<_>>()?;
            DeskCorpus {
                tester: kind,
                config: base(0.1).with_max_degree(n - 1),
                null: vec![q.clone()],
                reference: Some(q),
                far,
            }
        }
    };
    Ok(corpus)
}

impl DeskCorpus {
    /// Runs `trials` seeded trials on each side, cycling through the corpus models.
    pub fn run(&self, trials: usize, seed: u64) -> Result<CorpusRates> {
        let started = Instant::now();
        let reference = match &self.reference {
            Some(q) => Some((q.clone(), exact_summary(q)?.moments())),
            None => None,
        };
        let mut samples = 0usize;
        let mut side = |models: &[IsingModel], tag: u64| -> Result<usize> {
            let mut rejects = 0;
            for t in 0..trials {
                let model = &models[t % models.len()];
                let s = derive_seed(&[seed, tag, t as u64]);
                let mut source = ExactSampler::new(model, s)?;
                let mut config = self.config.clone();
                config.rng_seed = derive_seed(&[s, 1]);
                let v = run_tester(self.tester, &mut source, reference.as_ref().map(|(q, m)| (q, m)), &config)?;
                samples += v.samples_used;
                rejects += usize::from(v.is_reject());
            }
            Ok(rejects)
        };
        let null_rejects = side(&self.null, 0)?;
        let far_rejects = side(&self.far, 1)?;
        let t = trials as f64;
        Ok(CorpusRates {
            tester: self.tester,
            null_accept: 1.0 - null_rejects as f64 / t,
            far_reject: far_rejects as f64 / t,
            mean_samples: samples as f64 / (2.0 * t),
            elapsed: started.elapsed(),
        })
    }
}
