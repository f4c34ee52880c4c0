//! JSON config file for the non-experiment subcommands. Flags override it.

use std::path::PathBuf;

use isingtest::harness::{SamplerChoice, TesterKind};
use isingtest::{Constants, GlauberConfig, TesterConfig};
use serde::Deserialize;

use crate::{CliError, CliResult, Common, ModelArgs};

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub tester: Option<TesterKind>,
    pub beta: Option<f64>,
    pub dmax: Option<usize>,
    pub budget_override: Option<usize>,
    pub field_bound: Option<f64>,
    pub edge_bound: Option<usize>,
    pub fail_prob: Option<f64>,
    pub prefilter: Option<bool>,
    pub tau: Option<f64>,
    pub constants: Option<Constants>,
    pub sampler: Option<SamplerChoice>,
    pub glauber: Option<GlauberConfig>,
    pub family: Option<String>,
    pub n: Option<usize>,
}

/// Effective settings after merging the config file and the flags.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    pub model: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub seed: u64,
    pub tester: Option<TesterKind>,
    pub beta: Option<f64>,
    pub dmax: Option<usize>,
    pub budget_override: Option<usize>,
    pub sampler: SamplerChoice,
    pub glauber: GlauberConfig,
    pub family: Option<String>,
    pub n: Option<usize>,
    file: FileConfig,
}

impl Settings {
    pub fn load(common: &Common) -> CliResult<Self> {
        let file: FileConfig = match &common.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            model: file.model.clone(),
            reference: file.reference.clone(),
            samples: file.samples.clone(),
            out: common.out.clone().or(file.out.clone()),
            k: file.k,
            eps: file.eps,
            seed: common.seed.or(file.seed).unwrap_or(0),
            tester: file.tester,
            beta: file.beta,
            dmax: file.dmax,
            budget_override: file.budget_override,
            sampler: file.sampler.unwrap_or_default(),
            glauber: file.glauber.unwrap_or_default(),
            family: file.family.clone(),
            n: file.n,
            file,
        })
    }

    pub fn apply_models(&mut self, m: &ModelArgs) {
        self.model = m.model.clone().or(self.model.take());
        self.reference = m.reference.clone().or(self.reference.take());
    }

    pub fn tester_config(&self) -> CliResult<TesterConfig> {
        let eps = self.eps.ok_or(CliError::Missing("--eps"))?;
        let mut c = TesterConfig::new(eps, self.seed);
        c.beta = self.beta;
        c.max_degree = self.dmax;
        c.budget_override = self.budget_override;
        c.field_bound = self.file.field_bound;
        c.edge_bound = self.file.edge_bound;
        c.tau = self.file.tau;
        if let Some(p) = self.file.fail_prob {
            c.fail_prob = p;
        }
        if let Some(p) = self.file.prefilter {
            c.prefilter = p;
        }
        if let Some(k) = self.file.constants {
            c.constants = k;
        }
        c.validate()?;
        Ok(c)
    }
}
