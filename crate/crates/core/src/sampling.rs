//! Sample batches and samplers.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{check_cutoff, spin_of, state_probabilities};
use crate::model::IsingModel;
use crate::rng::{self, substream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Exact,
    Glauber,
    /// Loaded from disk or assembled by hand.
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub sampler: SamplerKind,
    pub k: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
    pub chains: usize,
    /// False when Glauber dynamics ran on a model outside the Dobrushin regime.
    pub high_temperature: bool,
}

impl SampleMeta {
    fn external(k: usize) -> Self {
        Self { sampler: SamplerKind::External, k, seed: 0, burn_in: 0, thinning: 0, chains: 0, high_temperature: true }
    }
}

/// `k` configurations stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    n: usize,
    spins: Vec<i8>,
    meta: SampleMeta,
}

impl SampleBatch {
    pub fn from_rows(n: usize, spins: Vec<i8>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("samples need at least one node".into()));
        }
        if spins.len() % n != 0 {
            return Err(Error::DimensionMismatch { expected: n, got: spins.len() % n });
        }
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin(i64::from(bad)));
        }
        let k = spins.len() / n;
        Ok(Self { n, spins, meta: SampleMeta::external(k) })
    }

    fn with_meta(n: usize, spins: Vec<i8>, meta: SampleMeta) -> Self {
        debug_assert_eq!(spins.len(), n * meta.k);
        Self { n, spins, meta }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.spins.len() / self.n
    }

    pub fn meta(&self) -> &SampleMeta {
        &self.meta
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.spins[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, i8> {
        self.spins.chunks_exact(self.n)
    }

    /// The batch with every spin flipped.
    pub fn negated(&self) -> Self {
        Self { n: self.n, spins: self.spins.iter().map(|s| -s).collect(), meta: self.meta.clone() }
    }

    /// Rows `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.k() {
            return Err(Error::SourceExhausted { requested: len, available: self.k().saturating_sub(start) });
        }
        let spins = self.spins[start * self.n..(start + len) * self.n].to_vec();
        Ok(Self { n: self.n, spins, meta: SampleMeta { k: len, ..self.meta.clone() } })
    }

    fn sidecar(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".meta.json");
        PathBuf::from(s)
    }

    /// CSV with one row per sample plus a `<path>.meta.json` sidecar.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        for row in self.rows() {
            w.write_record(row.iter().map(|s| if *s == 1 { "1" } else { "-1" }))?;
        }
        w.flush()?;
        std::fs::write(Self::sidecar(path), serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }

    /// Reads a CSV written by [`write_csv`](Self::write_csv); the sidecar is optional.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
        let mut n = None;
        let mut spins = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            match n {
                None => n = Some(rec.len()),
                Some(n) if n != rec.len() => return Err(Error::DimensionMismatch { expected: n, got: rec.len() }),
                _ => {}
            }
            for field in rec.iter() {
                let v: i64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("spin entry {field:?} is not an integer")))?;
                if v != 1 && v != -1 {
                    return Err(Error::InvalidSpin(v));
                }
                spins.push(v as i8);
            }
        }
        let n = n.ok_or(Error::Empty("sample file"))?;
        let mut batch = Self::from_rows(n, spins)?;
        let side = Self::sidecar(path);
        if side.exists() {
            let meta: SampleMeta = serde_json::from_str(&std::fs::read_to_string(side)?)?;
            if meta.k != batch.k() {
                return Err(Error::DimensionMismatch { expected: meta.k, got: batch.k() });
            }
            batch.meta = meta;
        }
        Ok(batch)
    }
}

/// Anything that can hand out fresh samples on demand.
pub trait SampleSource {
    fn n(&self) -> usize;
    fn draw(&mut self, k: usize) -> Result<SampleBatch>;
}

impl<S: SampleSource + ?Sized> SampleSource for &mut S {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn draw(&mut self, k: usize) -> Result<SampleBatch> {
        (**self).draw(k)
    }
}

impl<S: SampleSource + ?Sized> SampleSource for Box<S> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn draw(&mut self, k: usize) -> Result<SampleBatch> {
        (**self).draw(k)
    }
}

/// Inversion sampler over the exact cumulative distribution.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    n: usize,
    cdf: Vec<f64>,
    seed: u64,
    rng: rng::Rng,
}

impl ExactSampler {
    pub fn new(model: &IsingModel, seed: u64) -> Result<Self> {
        let (probs, _) = state_probabilities(model)?;
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { n: model.n(), cdf, seed, rng: rng::seeded(seed) })
    }

    fn draw_state(&mut self) -> usize {
        let total = *self.cdf.last().expect("nonempty");
        let u: f64 = self.rng.random::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

impl SampleSource for ExactSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&mut self, k: usize) -> Result<SampleBatch> {
        let n = self.n;
        let mut spins = Vec::with_capacity(k * n);
        for _ in 0..k {
            let s = self.draw_state();
            spins.extend((0..n).map(|u| spin_of(s, u)));
        }
        let meta = SampleMeta {
            sampler: SamplerKind::Exact,
            k,
            seed: self.seed,
            burn_in: 0,
            thinning: 0,
            chains: 1,
            high_temperature: true,
        };
        Ok(SampleBatch::with_meta(n, spins, meta))
    }
}

/// `k` i.i.d. samples from the exact distribution.
pub fn exact_draw(model: &IsingModel, k: usize, seed: u64) -> Result<SampleBatch> {
    ExactSampler::new(model, seed)?.draw(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlauberConfig {
    /// Burn-in is `ceil(C n ln n)` single-site steps.
    pub burn_in_multiplier: f64,
    /// Steps between retained samples, same form.
    pub thinning_multiplier: f64,
    pub chains: usize,
    /// Slack of the Dobrushin check recorded in the batch metadata.
    pub dobrushin_eta: f64,
}

impl Default for GlauberConfig {
    fn default() -> Self {
        Self { burn_in_multiplier: 10.0, thinning_multiplier: 2.0, chains: 4, dobrushin_eta: 0.1 }
    }
}

impl GlauberConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.burn_in_multiplier > 0.0 && self.thinning_multiplier > 0.0) {
            return Err(Error::InvalidParameter("Glauber multipliers must be positive".into()));
        }
        if !(self.dobrushin_eta > 0.0 && self.dobrushin_eta < 1.0) {
            return Err(Error::InvalidParameter("dobrushin_eta must lie in (0, 1)".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidParameter("at least one chain is required".into()));
        }
        Ok(())
    }

    fn steps(multiplier: f64, n: usize) -> usize {
        let n = n as f64;
        ((multiplier * n * n.ln()).ceil() as usize).max(1)
    }

    pub fn burn_in_steps(&self, n: usize) -> usize {
        Self::steps(self.burn_in_multiplier, n)
    }

    pub fn thinning_steps(&self, n: usize) -> usize {
        Self::steps(self.thinning_multiplier, n)
    }
}

/// Probability that the heat-bath update sets `x_u = +1`.
#[inline]
pub fn plus_probability(model: &IsingModel, x: &[i8], u: usize) -> f64 {
    1.0 / (1.0 + (-2.0 * model.local_field(x, u)).exp())
}

/// One single-site update at a uniformly chosen node; returns that node.
pub fn glauber_step<R: Rng + ?Sized>(model: &IsingModel, x: &mut [i8], rng: &mut R) -> usize {
    let u = rng.random_range(0..model.n());
    let p = plus_probability(model, x, u);
    x[u] = if rng.random::<f64>() < p { 1 } else { -1 };
    u
}

#[derive(Debug, Clone)]
struct Chain {
    rng: rng::Rng,
    state: Vec<i8>,
    burned: bool,
}

impl Chain {
    fn advance(&mut self, model: &IsingModel, steps: usize) {
        for _ in 0..steps {
            glauber_step(model, &mut self.state, &mut self.rng);
        }
    }

    fn collect(&mut self, model: &IsingModel, cfg: &GlauberConfig, count: usize) -> Vec<i8> {
        let n = model.n();
        if !self.burned {
            self.advance(model, cfg.burn_in_steps(n));
            self.burned = true;
        }
        let thin = cfg.thinning_steps(n);
        let mut out = Vec::with_capacity(count * n);
        for _ in 0..count {
            self.advance(model, thin);
            out.extend_from_slice(&self.state);
        }
        out
    }
}

/// Glauber dynamics over several independent chains.
///
/// Chain `c` runs on stream `c` of the master seed, so its trajectory does
/// not depend on how many other chains exist. Repeated draws continue the
/// chains where they stopped.
#[derive(Debug, Clone)]
pub struct GlauberSampler {
    model: IsingModel,
    config: GlauberConfig,
    seed: u64,
    chains: Vec<Chain>,
    high_temperature: bool,
}

impl GlauberSampler {
    pub fn new(model: &IsingModel, config: GlauberConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if model.n() == 0 {
            return Err(Error::InvalidParameter("model has no nodes".into()));
        }
        let chains = (0..config.chains)
            .map(|c| {
                let mut rng = substream(seed, c as u64);
                let state = (0..model.n()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
                Chain { rng, state, burned: false }
            })
            .collect();
        Ok(Self {
            model: model.clone(),
            config,
            seed,
            chains,
            high_temperature: model.dobrushin_check(config.dobrushin_eta),
        })
    }
}

impl SampleSource for GlauberSampler {
    fn n(&self) -> usize {
        self.model.n()
    }

    fn draw(&mut self, k: usize) -> Result<SampleBatch> {
        let c = self.chains.len();
        let counts: Vec<usize> = (0..c).map(|i| k / c + usize::from(i < k % c)).collect();
        let (model, cfg) = (&self.model, &self.config);
        #[cfg(feature = "parallel")]
        let parts: Vec<Vec<i8>> = {
            use rayon::prelude::*;
            self.chains.par_iter_mut().zip(counts.par_iter()).map(|(ch, &m)| ch.collect(model, cfg, m)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Vec<i8>> =
            self.chains.iter_mut().zip(&counts).map(|(ch, &m)| ch.collect(model, cfg, m)).collect();
        let n = self.model.n();
        let meta = SampleMeta {
            sampler: SamplerKind::Glauber,
            k,
            seed: self.seed,
            burn_in: self.config.burn_in_steps(n),
            thinning: self.config.thinning_steps(n),
            chains: c,
            high_temperature: self.high_temperature,
        };
        Ok(SampleBatch::with_meta(n, parts.concat(), meta))
    }
}

pub fn glauber_draw(model: &IsingModel, k: usize, config: GlauberConfig, seed: u64) -> Result<SampleBatch> {
    GlauberSampler::new(model, config, seed)?.draw(k)
}

/// Serves rows of a fixed batch in order.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    batch: SampleBatch,
    cursor: usize,
}

impl ReplaySource {
    pub fn new(batch: SampleBatch) -> Self {
        Self { batch, cursor: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.batch.k() - self.cursor
    }
}

impl SampleSource for ReplaySource {
    fn n(&self) -> usize {
        self.batch.n()
    }

    fn draw(&mut self, k: usize) -> Result<SampleBatch> {
        let out = self.batch.slice(self.cursor, k)?;
        self.cursor += k;
        Ok(out)
    }
}

/// Negates every sample of the wrapped source.
#[derive(Debug, Clone)]
pub struct FlippedSource<S>(pub S);

impl<S: SampleSource> SampleSource for FlippedSource<S> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn draw(&mut self, k: usize) -> Result<SampleBatch> {
        Ok(self.0.draw(k)?.negated())
    }
}

/// Counts configurations drawn through it.
#[derive(Debug)]
pub struct CountingSource<S> {
    inner: S,
    drawn: usize,
}

impl<S: SampleSource> CountingSource<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, drawn: 0 }
    }

    pub fn drawn(&self) -> usize {
        self.drawn
    }
}

impl<S: SampleSource> SampleSource for CountingSource<S> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn draw(&mut self, k: usize) -> Result<SampleBatch> {
        self.drawn += k;
        self.inner.draw(k)
    }
}

/// Dense row-stochastic Glauber transition matrix over all `2^n` states
/// (same state indexing as the exact enumeration).
pub fn transition_matrix(model: &IsingModel) -> Result<Vec<f64>> {
    let n = model.n();
    check_cutoff(n)?;
    if n > 12 {
        return Err(Error::InvalidParameter(format!("transition matrix for n = {n} is too large (max 12)")));
    }
    let states = 1usize << n;
    let mut p = vec![0.0; states * states];
    let mut x = vec![0i8; n];
    for s in 0..states {
        for (u, xu) in x.iter_mut().enumerate() {
            *xu = spin_of(s, u);
        }
        let mut stay = 1.0;
        for u in 0..n {
            let plus = plus_probability(model, &x, u);
            let flip = if x[u] == 1 { 1.0 - plus } else { plus } / n as f64;
            p[s * states + (s ^ (1 << u))] = flip;
            stay -= flip;
        }
        p[s * states + s] = stay;
    }
    Ok(p)
}
