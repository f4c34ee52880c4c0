//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes and returns JSON strings. The `*_json` functions hold
//! the logic and are plain Rust so they can be tested natively.

use isingtest::harness::{run_trials, ExperimentSpec};
use isingtest::rng::seeded;
use isingtest::{exact_summary, sign_guess, Error, IsingModel, Result};
use rand::Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest model the page may enumerate or run experiments on.
pub const MAX_N: usize = 14;
/// Cap on `instances x budgets x trials` so a click cannot freeze the tab.
pub const MAX_TRIALS: usize = 2_000;

#[derive(Serialize)]
struct Marginals {
    n: usize,
    log_partition: f64,
    node: Vec<f64>,
    pair: Vec<Vec<f64>>,
    covariance: Vec<Vec<f64>>,
}

pub fn exact_marginals_json(model_json: &str) -> Result<String> {
    let model = IsingModel::from_json(model_json)?;
    if model.n() > MAX_N {
        return Err(Error::InvalidParameter(format!("n = {} exceeds the demo limit {MAX_N}", model.n())));
    }
    let s = exact_summary(&model)?;
    let n = s.n;
    let grid = |f: &dyn Fn(usize, usize) -> f64| (0..n).map(|u| (0..n).map(|v| f(u, v)).collect()).collect();
    let out = Marginals {
        n,
        log_partition: s.log_partition,
        node: s.node_marginals.clone(),
        pair: grid(&|u, v| s.edge_marginal(u, v)),
        covariance: grid(&|u, v| s.covariance(u, v)),
    };
    Ok(serde_json::to_string(&out)?)
}

pub fn power_curve_json(spec_json: &str) -> Result<String> {
    let mut spec = ExperimentSpec::from_json(spec_json)?;
    spec.output = None;
    spec.record_timing = false;
    let cells = spec.instances.len() * spec.budgets.len() * spec.trials;
    if cells > MAX_TRIALS {
        return Err(Error::InvalidParameter(format!("{cells} trials requested, the demo allows {MAX_TRIALS}")));
    }
    for inst in &spec.instances {
        if inst.spec.build()?.n() > MAX_N {
            return Err(Error::InvalidParameter(format!("instance {} exceeds n = {MAX_N}", inst.name)));
        }
    }
    let report = run_trials(&spec)?;
    #[derive(Serialize)]
    struct Curve<'a> {
        cells: &'a [isingtest::harness::CellSummary],
        power: &'a [isingtest::harness::PowerPoint],
    }
    Ok(serde_json::to_string(&Curve { cells: &report.cells, power: &report.power })?)
}

#[derive(Debug, Serialize, PartialEq)]
pub struct AdvantagePoint {
    pub k: usize,
    pub empirical: f64,
    /// Exact success probability of the majority vote with coin tie-break.
    pub exact: f64,
    /// `1/2 + 0.15 lambda sqrt(k)`.
    pub floor: f64,
}

/// Majority-vote success probability for `k` draws of mean `lambda`.
pub fn majority_success(k: usize, lambda: f64) -> f64 {
    let p = 0.5 * (1.0 + lambda);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0;
    let mut total = 0.0;
    for plus in 0..=k {
        if plus > 0 {
            log_choose += ((k - plus + 1) as f64).ln() - (plus as f64).ln();
        }
        let w = (log_choose + plus as f64 * lp + (k - plus) as f64 * lq).exp();
        total += match (2 * plus).cmp(&k) {
            std::cmp::Ordering::Greater => w,
            std::cmp::Ordering::Equal => 0.5 * w,
            std::cmp::Ordering::Less => 0.0,
        };
    }
    total
}

pub fn sign_guess_curve_points(lambda: f64, k_max: usize, trials: usize, seed: u64) -> Result<Vec<AdvantagePoint>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must lie in [0, 1]")));
    }
    if k_max == 0 || trials == 0 || k_max * trials > 20_000_000 {
        return Err(Error::InvalidParameter("need 1 <= k_max, 1 <= trials and k_max * trials <= 2e7".into()));
    }
    let mut rng = seeded(seed);
    let p = 0.5 * (1.0 + lambda);
    let mut buf = Vec::with_capacity(k_max);
    let mut out = Vec::new();
    let mut k = 1;
    while k <= k_max {
        let mut hits = 0usize;
        for _ in 0..trials {
            buf.clear();
            buf.extend((0..k).map(|_| if rng.random::<f64>() < p { 1i8 } else { -1 }));
            hits += usize::from(sign_guess(&buf, &mut rng)? == 1);
        }
        out.push(AdvantagePoint {
            k,
            empirical: hits as f64 / trials as f64,
            exact: majority_success(k, lambda),
            floor: 0.5 + 0.15 * lambda * (k as f64).sqrt(),
        });
        k = if k < 8 { k + 1 } else { k * 2 };
    }
    Ok(out)
}

pub fn sign_guess_curve_json(lambda: f64, k_max: usize, trials: usize, seed: u64) -> Result<String> {
    Ok(serde_json::to_string(&sign_guess_curve_points(lambda, k_max, trials, seed)?)?)
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn exact_marginals(model_json: &str) -> std::result::Result<String, JsError> {
    js(exact_marginals_json(model_json))
}

#[wasm_bindgen]
pub fn power_curve(spec_json: &str) -> std::result::Result<String, JsError> {
    js(power_curve_json(spec_json))
}

#[wasm_bindgen]
pub fn sign_guess_curve(lambda: f64, k_max: usize, trials: usize, seed: u32) -> std::result::Result<String, JsError> {
    js(sign_guess_curve_json(lambda, k_max, trials, u64::from(seed)))
}
