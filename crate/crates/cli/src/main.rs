//! `isingtest` command-line front end.
//!
//! Exit codes: 0 accept (or success), 1 reject, 2 error.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isingtest::hard::{
    make_product_perturbation, make_random_matching, make_two_node_pair, HardInstance, SignChoice, TwoNodeMode,
};
use isingtest::harness::{run_tester, run_trials, ExperimentSpec, SamplerChoice, TesterKind};
use isingtest::sampling::{ExactSampler, GlauberSampler, ReplaySource};
use isingtest::{exact_summary, skl_direct, tv_direct, IsingModel, SampleBatch, SampleSource};
use serde::Serialize;

use config::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] isingtest::Error),
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "isingtest", version, about = "Independence and identity testing for Ising models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// JSON file with default values for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ModelArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Reference model `q` for identity testing and divergences.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples from a model and write them as CSV.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        models: ModelArgs,
        #[arg(long)]
        k: Option<usize>,
        /// `exact` (n <= 20) or `glauber`.
        #[arg(long, value_parser = parse_sampler)]
        sampler: Option<SamplerChoice>,
    },
    /// Exact marginals by enumeration, plus distances to `--reference`.
    Exact {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        models: ModelArgs,
    },
    /// Run one tester on a sample file or on fresh samples from a model.
    Test {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        models: ModelArgs,
        /// Sample CSV to test; replaces `--model` as the source.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        tester: Option<TesterKind>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        dmax: Option<usize>,
        #[arg(long)]
        budget_override: Option<usize>,
        #[arg(long, value_parser = parse_sampler)]
        sampler: Option<SamplerChoice>,
    },
    /// Generate a lower-bound instance.
    MakeInstance {
        #[command(flatten)]
        common: Common,
        /// product-perturbation, random-matching, beta-independence, beta-identity or h-identity.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        /// Coupling (or field, for h-identity) of the two-node families.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Run a power-curve experiment described by the `--config` spec.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tester: Option<TesterKind>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        dmax: Option<usize>,
    },
}

fn parse_sampler(s: &str) -> Result<SamplerChoice, String> {
    match s {
        "exact" => Ok(SamplerChoice::Exact),
        "glauber" => Ok(SamplerChoice::Glauber),
        other => Err(format!("unknown sampler {other:?}")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn source_for(model: &IsingModel, s: &Settings) -> CliResult<Box<dyn SampleSource>> {
    Ok(match s.sampler {
        SamplerChoice::Exact => Box::new(ExactSampler::new(model, s.seed)?),
        SamplerChoice::Glauber => Box::new(GlauberSampler::new(model, s.glauber, s.seed)?),
    })
}

fn cmd_sample(s: Settings) -> CliResult<ExitCode> {
    let model = IsingModel::load(s.model.as_ref().ok_or(CliError::Missing("--model"))?)?;
    let k = s.k.ok_or(CliError::Missing("--k"))?;
    let out = s.out.as_ref().ok_or(CliError::Missing("--out"))?;
    let batch = source_for(&model, &s)?.draw(k)?;
    batch.write_csv(out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ExactReport {
    n: usize,
    log_partition: f64,
    node_marginals: Vec<f64>,
    edge_marginals: Vec<Vec<f64>>,
    dobrushin: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    skl_to_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tv_to_reference: Option<f64>,
}

fn cmd_exact(s: Settings) -> CliResult<ExitCode> {
    let model = IsingModel::load(s.model.as_ref().ok_or(CliError::Missing("--model"))?)?;
    let summary = exact_summary(&model)?;
    let (skl, tv) = match &s.reference {
        Some(path) => {
            let q = IsingModel::load(path)?;
            (Some(skl_direct(&model, &q)?), Some(tv_direct(&model, &q)?))
        }
        None => (None, None),
    };
    let report = ExactReport {
        n: summary.n,
        log_partition: summary.log_partition,
        edge_marginals: summary.edge_marginals.chunks(summary.n.max(1)).map(<[f64]>::to_vec).collect(),
        node_marginals: summary.node_marginals,
        dobrushin: model.dobrushin_check(s.glauber.dobrushin_eta),
        skl_to_reference: skl,
        tv_to_reference: tv,
    };
    emit(s.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_test(s: Settings) -> CliResult<ExitCode> {
    let tester = s.tester.ok_or(CliError::Missing("--tester"))?;
    let mut source: Box<dyn SampleSource> = match (&s.samples, &s.model) {
        (Some(path), _) => Box::new(ReplaySource::new(SampleBatch::read_csv(path)?)),
        (None, Some(path)) => source_for(&IsingModel::load(path)?, &s)?,
        (None, None) => return Err(CliError::Missing("--samples or --model")),
    };
    let reference = match (&s.reference, tester.is_identity()) {
        (Some(path), true) => {
            let q = IsingModel::load(path)?;
            let mq = exact_summary(&q)?.moments();
            Some((q, mq))
        }
        (None, true) => return Err(CliError::Missing("--reference for an identity tester")),
        (_, false) => None,
    };
    let config = s.tester_config()?;
    let verdict = run_tester(tester, source.as_mut(), reference.as_ref().map(|(q, m)| (q, m)), &config)?;
    emit(s.out.as_deref(), &verdict.to_json()?)?;
    Ok(if verdict.is_reject() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

#[derive(Serialize)]
struct InstanceReport {
    family: String,
    n: usize,
    certified_skl: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    model: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<PathBuf>,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_make_instance(s: Settings) -> CliResult<ExitCode> {
    let family = s.family.clone().ok_or(CliError::Missing("--family"))?;
    let eps = s.eps.ok_or(CliError::Missing("--eps"))?;
    let out = s.out.clone().ok_or(CliError::Missing("--out"))?;
    let report = match family.as_str() {
        "product-perturbation" | "random-matching" => {
            let n = s.n.ok_or(CliError::Missing("--n"))?;
            let inst: HardInstance = if family == "random-matching" {
                make_random_matching(n, eps, s.seed)?
            } else {
                make_product_perturbation(n, eps, SignChoice::Seed(s.seed))?
            };
            inst.save(&out)?;
            InstanceReport {
                family,
                n,
                certified_skl: inst.certified_skl,
                delta: Some(inst.delta),
                tau: None,
                model: out,
                reference: None,
            }
        }
        "beta-independence" | "beta-identity" | "h-identity" => {
            let mode = match family.as_str() {
                "beta-independence" => TwoNodeMode::BetaIndependence,
                "beta-identity" => TwoNodeMode::BetaIdentity,
                _ => TwoNodeMode::HIdentity,
            };
            let b = s.beta.ok_or(CliError::Missing("--beta"))?;
            let pair = make_two_node_pair(mode, b, eps)?;
            let reference = sibling(&out, ".reference.json");
            pair.p.save(&out)?;
            pair.q.save(&reference)?;
            InstanceReport {
                family,
                n: pair.p.n(),
                certified_skl: pair.certified_skl,
                delta: None,
                tau: Some(pair.tau),
                model: out,
                reference: Some(reference),
            }
        }
        other => return Err(CliError::Usage(format!("unknown family {other:?}"))),
    };
    emit(None, &serde_json::to_string_pretty(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(spec: ExperimentSpec) -> CliResult<ExitCode> {
    let report = run_trials(&spec)?;
    if spec.output.is_none() {
        emit(None, &report.trials_csv()?)?;
    }
    for cell in report.cells.iter().filter(|c| c.error.is_some()) {
        eprintln!("{} @ {}: {}", cell.instance, cell.budget, cell.error.as_deref().unwrap_or_default());
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Sample { common, models, k, sampler } => {
            let mut s = Settings::load(&common)?;
            s.apply_models(&models);
            s.k = k.or(s.k);
            s.sampler = sampler.unwrap_or(s.sampler);
            cmd_sample(s)
        }
        Command::Exact { common, models } => {
            let mut s = Settings::load(&common)?;
            s.apply_models(&models);
            cmd_exact(s)
        }
        Command::Test { common, models, samples, tester, eps, beta, dmax, budget_override, sampler } => {
            let mut s = Settings::load(&common)?;
            s.apply_models(&models);
            s.samples = samples.or(s.samples);
            s.tester = tester.or(s.tester);
            s.eps = eps.or(s.eps);
            s.beta = beta.or(s.beta);
            s.dmax = dmax.or(s.dmax);
            s.budget_override = budget_override.or(s.budget_override);
            s.sampler = sampler.unwrap_or(s.sampler);
            cmd_test(s)
        }
        Command::MakeInstance { common, family, n, eps, beta } => {
            let mut s = Settings::load(&common)?;
            s.family = family.or(s.family);
            s.n = n.or(s.n);
            s.eps = eps.or(s.eps);
            s.beta = beta.or(s.beta);
            cmd_make_instance(s)
        }
        Command::Experiment { common, tester, eps, beta, dmax } => {
            let path = common.config.as_ref().ok_or(CliError::Missing("--config with the experiment spec"))?;
            let mut spec: ExperimentSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if let Some(seed) = common.seed {
                spec.seed = seed;
            }
            if let Some(out) = &common.out {
                spec.output = Some(out.clone());
            }
            spec.tester = tester.unwrap_or(spec.tester);
            if let Some(e) = eps {
                spec.config.epsilon = e;
            }
            spec.config.beta = beta.or(spec.config.beta);
            spec.config.max_degree = dmax.or(spec.config.max_degree);
            spec.validate()?;
            cmd_experiment(spec)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
