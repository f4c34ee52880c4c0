//! Experiment orchestration: power curves over instances and budgets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::TesterConfig;
use crate::error::{Error, Result};
use crate::estimation::MomentTable;
use crate::exact::exact_summary;
use crate::hard::{make_product_perturbation, make_random_matching, SignChoice};
use crate::model::{IsingModel, ModelFile};
use crate::rng::derive_seed;
use crate::sampling::{ExactSampler, GlauberConfig, GlauberSampler, SampleSource};
use crate::testers::{
    test_identity_forest, test_identity_localization, test_independence_ferro, test_independence_forest,
    test_independence_localization, test_learn_then_test, LttMode, TestVerdict,
};

/// Version of the trial CSV layout, written as the first line.
pub const CSV_SCHEMA: u32 = 1;
pub const CSV_HEADER: [&str; 9] = ["instance", "family", "n", "budget", "trial", "decision", "statistic", "seed", "ms"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TesterKind {
    LocInd,
    LocId,
    ForestInd,
    ForestId,
    FerroInd,
    LttInd,
    LttId,
}

impl TesterKind {
    pub const ALL: [TesterKind; 7] = [
        TesterKind::LocInd,
        TesterKind::LocId,
        TesterKind::ForestInd,
        TesterKind::ForestId,
        TesterKind::FerroInd,
        TesterKind::LttInd,
        TesterKind::LttId,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TesterKind::LocInd => "loc-ind",
            TesterKind::LocId => "loc-id",
            TesterKind::ForestInd => "forest-ind",
            TesterKind::ForestId => "forest-id",
            TesterKind::FerroInd => "ferro-ind",
            TesterKind::LttInd => "ltt-ind",
            TesterKind::LttId => "ltt-id",
        }
    }

    pub fn is_identity(self) -> bool {
        matches!(self, TesterKind::LocId | TesterKind::ForestId | TesterKind::LttId)
    }
}

impl fmt::Display for TesterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TesterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TesterKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown tester {s:?}")))
    }
}

/// Runs one tester. Identity testers need the reference model and its exact moments.
pub fn run_tester(
    kind: TesterKind,
    source: &mut dyn SampleSource,
    reference: Option<(&IsingModel, &MomentTable)>,
    config: &TesterConfig,
) -> Result<TestVerdict> {
    let need_ref = || reference.ok_or_else(|| Error::InvalidParameter(format!("{kind} needs a reference model")));
    match kind {
        TesterKind::LocInd => test_independence_localization(source, config),
        TesterKind::LocId => {
            let (q, mq) = need_ref()?;
            test_identity_localization(source, q, mq, config)
        }
        TesterKind::ForestInd => test_independence_forest(source, config),
        TesterKind::ForestId => test_identity_forest(source, need_ref()?.0, config),
        TesterKind::FerroInd => test_independence_ferro(source, config),
        TesterKind::LttInd => test_learn_then_test(source, LttMode::independence(config), config),
        TesterKind::LttId => {
            let (q, mq) = need_ref()?;
            test_learn_then_test(source, LttMode::identity(q, mq, config), config)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSpec {
    Uniform { n: usize },
    ProductPerturbation { n: usize, eps: f64, seed: u64 },
    RandomMatching { n: usize, eps: f64, seed: u64 },
    Model { model: ModelFile },
    ModelPath { path: PathBuf },
}

impl InstanceSpec {
    pub fn family(&self) -> &'static str {
        match self {
            InstanceSpec::Uniform { .. } => "uniform",
            InstanceSpec::ProductPerturbation { .. } => "product-perturbation",
            InstanceSpec::RandomMatching { .. } => "random-matching",
            InstanceSpec::Model { .. } => "model",
            InstanceSpec::ModelPath { .. } => "model-path",
        }
    }

    pub fn build(&self) -> Result<IsingModel> {
        match self {
            InstanceSpec::Uniform { n } => Ok(IsingModel::uniform(*n)),
            InstanceSpec::ProductPerturbation { n, eps, seed } => {
                Ok(make_product_perturbation(*n, *eps, SignChoice::Seed(*seed))?.model)
            }
            InstanceSpec::RandomMatching { n, eps, seed } => Ok(make_random_matching(*n, *eps, *seed)?.model),
            InstanceSpec::Model { model } => model.clone().into_model(),
            InstanceSpec::ModelPath { path } => IsingModel::load(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedInstance {
    pub name: String,
    #[serde(flatten)]
    pub spec: InstanceSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    #[default]
    Exact,
    Glauber,
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub tester: TesterKind,
    pub instances: Vec<NamedInstance>,
    /// Reference model for identity testers; uniform on the instance's nodes when absent.
    #[serde(default)]
    pub reference: Option<InstanceSpec>,
    pub budgets: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub config: TesterConfig,
    #[serde(default)]
    pub sampler: SamplerChoice,
    #[serde(default)]
    pub glauber: GlauberConfig,
    /// Where the trial CSV goes; the summary and power tables are written beside it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fill the `ms` column with wall time. Off by default so the CSV is reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.instances.is_empty() {
            return Err(Error::Empty("experiment instances"));
        }
        if self.budgets.is_empty() {
            return Err(Error::Empty("experiment budgets"));
        }
        if self.budgets[0] == 0 || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("budgets must be positive and strictly increasing".into()));
        }
        for inst in &self.instances {
            if inst.name.is_empty() || inst.name.contains([',', '"', '\n']) {
                return Err(Error::InvalidParameter(format!("instance name {:?} is not CSV-safe", inst.name)));
            }
        }
        self.config.validate()?;
        self.glauber.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub instance: String,
    pub family: String,
    pub n: usize,
    pub budget: usize,
    pub trial: usize,
    pub reject: bool,
    pub statistic: f64,
    pub seed: u64,
    pub ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub instance: String,
    pub budget: usize,
    pub reject_rate: f64,
    pub mean_statistic: f64,
    pub wall_time_ms: f64,
    /// Set when the tester could not run on this instance.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub instance: String,
    pub d_max: usize,
    /// Smallest budget with reject rate at least 0.8, if any.
    pub budget_80: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tester: TesterKind,
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellSummary>,
    pub power: Vec<PowerPoint>,
}

impl ExperimentReport {
    pub fn cell(&self, instance: &str, budget: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.instance == instance && c.budget == budget)
    }

    pub fn trials_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record([format!("schema={CSV_SCHEMA}")])?;
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.instance.clone(),
                r.family.clone(),
                r.n.to_string(),
                r.budget.to_string(),
                r.trial.to_string(),
                if r.reject { "reject" } else { "accept" }.to_string(),
                r.statistic.to_string(),
                r.seed.to_string(),
                r.ms.to_string(),
            ])?;
        }
        into_string(w)
    }

    /// Budget reaching 80% power against maximum degree.
    pub fn power_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record([format!("schema={CSV_SCHEMA}")])?;
        w.write_record(["instance", "d_max", "budget_80"])?;
        for p in &self.power {
            w.write_record([
                p.instance.clone(),
                p.d_max.to_string(),
                p.budget_80.map(|b| b.to_string()).unwrap_or_default(),
            ])?;
        }
        into_string(w)
    }

    /// Writes `path`, `<path>.summary.json`, and `<path>.power.csv`.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.trials_csv()?)?;
        std::fs::write(with_suffix(path, ".summary.json"), serde_json::to_string_pretty(&self.cells)?)?;
        std::fs::write(with_suffix(path, ".power.csv"), self.power_csv()?)?;
        Ok(())
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct Prepared {
    name: String,
    family: &'static str,
    model: IsingModel,
    reference: Option<(IsingModel, MomentTable)>,
}

fn prepare(spec: &ExperimentSpec, inst: &NamedInstance) -> Result<Prepared> {
    let model = inst.spec.build()?;
    let reference = if spec.tester.is_identity() {
        let q = match &spec.reference {
            Some(r) => r.build()?,
            None => IsingModel::uniform(model.n()),
        };
        if q.n() != model.n() {
            return Err(Error::DimensionMismatch { expected: model.n(), got: q.n() });
        }
        let mq = exact_summary(&q)?.moments();
        Some((q, mq))
    } else {
        None
    };
    Ok(Prepared { name: inst.name.clone(), family: inst.spec.family(), model, reference })
}

/// Wall clock, absent on targets without one (browser wasm); times then read as 0.
fn clock() -> Option<Instant> {
    if cfg!(target_family = "wasm") {
        None
    } else {
        Some(Instant::now())
    }
}

fn elapsed_ms(start: Option<Instant>) -> f64 {
    start.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3)
}

fn run_cell(spec: &ExperimentSpec, inst_idx: usize, prep: &Prepared, budget_idx: usize) -> (Vec<TrialRecord>, CellSummary) {
    let budget = spec.budgets[budget_idx];
    let started = clock();
    let mut records = Vec::with_capacity(spec.trials);
    let mut error = None;
    for trial in 0..spec.trials {
        let seed = derive_seed(&[spec.seed, inst_idx as u64, budget_idx as u64, trial as u64]);
        let t0 = clock();
        let outcome = (|| -> Result<TestVerdict> {
            let mut source: Box<dyn SampleSource> = match spec.sampler {
                SamplerChoice::Exact => Box::new(ExactSampler::new(&prep.model, seed)?),
                SamplerChoice::Glauber => Box::new(GlauberSampler::new(&prep.model, spec.glauber, seed)?),
            };
            let mut config = spec.config.clone();
            config.rng_seed = derive_seed(&[seed, 1]);
            config.budget_override = Some(budget);
            run_tester(spec.tester, &mut source, prep.reference.as_ref().map(|(q, m)| (q, m)), &config)
        })();
        match outcome {
            Ok(v) => records.push(TrialRecord {
                instance: prep.name.clone(),
                family: prep.family.to_string(),
                n: prep.model.n(),
                budget,
                trial,
                reject: v.is_reject(),
                statistic: v.statistic,
                seed,
                ms: if spec.record_timing { elapsed_ms(t0) as u64 } else { 0 },
            }),
            Err(e) => {
                error = Some(e.to_string());
                records.clear();
                break;
            }
        }
    }
    let count = records.len().max(1) as f64;
    let summary = CellSummary {
        instance: prep.name.clone(),
        budget,
        reject_rate: records.iter().filter(|r| r.reject).count() as f64 / count,
        mean_statistic: records.iter().map(|r| r.statistic).sum::<f64>() / count,
        wall_time_ms: elapsed_ms(started),
        error,
    };
    (records, summary)
}

/// Runs every (instance, budget, trial) cell. Output is ordered by
/// instance, then budget, then trial, and depends only on the spec.
pub fn run_trials(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let prepared: Vec<Prepared> = spec.instances.iter().map(|i| prepare(spec, i)).collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> =
        (0..prepared.len()).flat_map(|i| (0..spec.budgets.len()).map(move |b| (i, b))).collect();

    #[cfg(feature = "parallel")]
    let results: Vec<(Vec<TrialRecord>, CellSummary)> = {
        use rayon::prelude::*;
        cells.par_iter().map(|&(i, b)| run_cell(spec, i, &prepared[i], b)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(Vec<TrialRecord>, CellSummary)> =
        cells.iter().map(|&(i, b)| run_cell(spec, i, &prepared[i], b)).collect();

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for (r, s) in results {
        records.extend(r);
        summaries.push(s);
    }
    let power = prepared
        .iter()
        .map(|p| PowerPoint {
            instance: p.name.clone(),
            d_max: p.model.max_degree(),
            budget_80: summaries
                .iter()
                .filter(|c| c.instance == p.name && c.error.is_none() && c.reject_rate >= 0.8)
                .map(|c| c.budget)
                .min(),
        })
        .collect();
    let report = ExperimentReport { tester: spec.tester, records, cells: summaries, power };
    if let Some(path) = &spec.output {
        report.write(path)?;
    }
    Ok(report)
}
