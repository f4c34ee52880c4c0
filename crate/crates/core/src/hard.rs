//! Generators for lower-bound instance families.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::SignVector;
use crate::exact::{exact_summary, skl_direct};
use crate::model::IsingModel;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ProductPerturbation,
    RandomMatching,
}

/// A model from a lower-bound family with its certified distance to uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct HardInstance {
    pub model: IsingModel,
    pub family: Family,
    pub certified_skl: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSidecar {
    pub family: Family,
    pub delta: f64,
    pub certified_skl: f64,
}

impl HardInstance {
    fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".instance.json");
        PathBuf::from(s)
    }

    /// Writes the model JSON to `path` and `{family, delta, certified_skl}` next to it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.model.save(path)?;
        let side = InstanceSidecar { family: self.family, delta: self.delta, certified_skl: self.certified_skl };
        std::fs::write(Self::sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let model = IsingModel::load(path)?;
        let side: InstanceSidecar = serde_json::from_str(&std::fs::read_to_string(Self::sidecar_path(path))?)?;
        Ok(Self { model, family: side.family, certified_skl: side.certified_skl, delta: side.delta })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignChoice {
    Signs(Vec<i8>),
    Seed(u64),
}

/// Node fields `+-delta` with `delta = sqrt(3 eps / 2n)`; distance to uniform `n delta tanh delta >= eps`.
pub fn make_product_perturbation(n: usize, eps: f64, signs: SignChoice) -> Result<HardInstance> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(eps > 0.0 && eps <= n as f64 / 6.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, n/6]")));
    }
    let delta = (1.5 * eps / n as f64).sqrt();
    let signs = match signs {
        SignChoice::Signs(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.len() });
            }
            SignVector::new(s)?
        }
        SignChoice::Seed(seed) => SignVector::random(n, &mut seeded(seed)),
    };
    let fields = signs.values().iter().map(|&s| f64::from(s) * delta).collect();
    Ok(HardInstance {
        model: IsingModel::product(fields)?,
        family: Family::ProductPerturbation,
        certified_skl: n as f64 * delta * delta.tanh(),
        delta,
    })
}

/// Uniformly random perfect matching with `delta = sqrt(3 eps / n)` on every
/// edge; distance to uniform `(n/2) delta tanh delta >= eps`.
pub fn make_random_matching(n: usize, eps: f64, seed: u64) -> Result<HardInstance> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidParameter(format!("n = {n} must be even and positive")));
    }
    if !(eps > 0.0 && eps <= n as f64 / 3.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, n/3]")));
    }
    let delta = (3.0 * eps / n as f64).sqrt();
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut seeded(seed));
    let edges: Vec<_> = nodes
        .chunks_exact(2)
        .map(|p| (p[0].min(p[1]), p[0].max(p[1]), delta))
        .collect();
    Ok(HardInstance {
        model: IsingModel::from_edges(n, vec![0.0; n], &edges)?,
        family: Family::RandomMatching,
        certified_skl: n as f64 / 2.0 * delta * delta.tanh(),
        delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoNodeMode {
    /// `p`: fields `tau` on both nodes and edge `beta`; `q`: same fields, no edge.
    BetaIndependence,
    /// `q`: edge `beta`; `p`: edge `beta - tau`, `tau` in `[beta/2, beta]`.
    BetaIdentity,
    /// One node. `q`: field `h`; `p`: field `h - tau`, `tau` in `[0, h]`.
    HIdentity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoNodePair {
    pub p: IsingModel,
    pub q: IsingModel,
    pub tau: f64,
    pub certified_skl: f64,
}

pub const BISECTION_ITERATIONS: usize = 200;

/// Root of a function with `f(lo)` and `f(hi)` of opposite signs.
fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot { lo, hi, reason: format!("f(lo) = {flo:.3e} and f(hi) = {fhi:.3e} share a sign") });
    }
    let lo_sign = flo.signum();
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn beta_independence_pair(beta: f64, tau: f64) -> Result<(IsingModel, IsingModel)> {
    Ok((
        IsingModel::from_edges(2, vec![tau, tau], &[(0, 1, beta)])?,
        IsingModel::product(vec![tau, tau])?,
    ))
}

/// Two-node (or one-node) pair whose distance is exactly `eps`, found by bisection.
pub fn make_two_node_pair(mode: TwoNodeMode, beta_or_h: f64, eps: f64) -> Result<TwoNodePair> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    let b = beta_or_h;
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("parameter {b} must be positive")));
    }
    let (p, q, tau) = match mode {
        TwoNodeMode::BetaIndependence => {
            // beta (E_p[X_u X_v] - tanh^2 tau) - eps, decreasing from beta tanh beta - eps.
            let gap = |tau: f64| -> Result<f64> {
                let (p, _) = beta_independence_pair(b, tau)?;
                Ok(b * (exact_summary(&p)?.edge_marginal(0, 1) - tau.tanh().powi(2)) - eps)
            };
            let mut hi = 1.0;
            while gap(hi)? > 0.0 && hi < 64.0 {
                hi *= 2.0;
            }
            let tau = bisect(gap, 0.0, hi)?;
            let (p, q) = beta_independence_pair(b, tau)?;
            (p, q, tau)
        }
        TwoNodeMode::BetaIdentity => {
            let f = |tau: f64| Ok(tau * (b.tanh() - (b - tau).tanh()) - eps);
            let tau = bisect(f, b / 2.0, b)?;
            (
                IsingModel::from_edges(2, vec![0.0; 2], &[(0, 1, b - tau)])?,
                IsingModel::from_edges(2, vec![0.0; 2], &[(0, 1, b)])?,
                tau,
            )
        }
        TwoNodeMode::HIdentity => {
            let f = |tau: f64| Ok(tau * (b.tanh() - (b - tau).tanh()) - eps);
            let tau = bisect(f, 0.0, b)?;
            (IsingModel::product(vec![b - tau])?, IsingModel::product(vec![b])?, tau)
        }
    };
    let certified_skl = skl_direct(&p, &q)?;
    Ok(TwoNodePair { p, q, tau, certified_skl })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_perturbation_example() {
        let inst = make_product_perturbation(8, 0.1, SignChoice::Seed(1)).unwrap();
        assert!((inst.delta - 0.136_931).abs() < 1e-6);
        assert!((inst.certified_skl - 0.1491).abs() < 1e-4);
        assert!(inst.certified_skl >= 0.1);
        let direct = skl_direct(&inst.model, &IsingModel::uniform(8)).unwrap();
        assert!((direct - inst.certified_skl).abs() < 1e-9);
        assert_eq!(inst, make_product_perturbation(8, 0.1, SignChoice::Seed(1)).unwrap());
        assert!(make_product_perturbation(8, 2.0, SignChoice::Seed(1)).is_err());
        assert!(make_product_perturbation(2, 0.1, SignChoice::Signs(vec![1])).is_err());
    }

    #[test]
    fn tiny_eps_is_nearly_uniform() {
        let inst = make_product_perturbation(4, 1e-12, SignChoice::Signs(vec![1, -1, 1, 1])).unwrap();
        assert!(inst.model.field() < 1e-5);
    }

    #[test]
    fn matching_example() {
        let inst = make_random_matching(6, 0.12, 4).unwrap();
        assert!((inst.delta - 0.244_949).abs() < 1e-6);
        assert!((inst.certified_skl - 0.1765).abs() < 1e-4);
        assert_eq!(inst.model.edge_count(), 3);
        assert!((0..6).all(|u| inst.model.neighbors(u).len() == 1));
        let f = inst.model.classify();
        assert!(f.is_forest && f.is_ferromagnetic && f.is_zero_field);
        assert!(make_random_matching(5, 0.1, 1).is_err());
    }

    #[test]
    fn beta_independence_root() {
        let pair = make_two_node_pair(TwoNodeMode::BetaIndependence, 1.0, 0.1).unwrap();
        let mu = exact_summary(&pair.p).unwrap().edge_marginal(0, 1);
        assert!((mu - pair.tau.tanh().powi(2) - 0.1).abs() <= 1e-10);
        assert!((pair.certified_skl - 0.1).abs() <= 1e-10);
    }

    #[test]
    fn beta_identity_root_and_bracket() {
        let pair = make_two_node_pair(TwoNodeMode::BetaIdentity, 4.0, 0.1).unwrap();
        assert!((pair.certified_skl - 0.1).abs() <= 1e-10);
        assert!(pair.tau >= 2.0 && pair.tau <= 4.0);
        // At the bracket end tau = beta the distance is beta tanh beta.
        let p = IsingModel::uniform(2);
        let q = IsingModel::from_edges(2, vec![0.0; 2], &[(0, 1, 3.0)]).unwrap();
        assert!((skl_direct(&p, &q).unwrap() - 3.0 * 3f64.tanh()).abs() < 1e-12);
        // Small beta has no root in [beta/2, beta].
        assert!(matches!(make_two_node_pair(TwoNodeMode::BetaIdentity, 0.1, 0.5), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn h_identity_root() {
        let pair = make_two_node_pair(TwoNodeMode::HIdentity, 0.8, 0.05).unwrap();
        let t = pair.tau;
        assert!((t * (0.8f64.tanh() - (0.8 - t).tanh()) - 0.05).abs() < 1e-10);
        assert!((pair.certified_skl - 0.05).abs() < 1e-10);
        assert!(make_two_node_pair(TwoNodeMode::HIdentity, 0.8, 1.5).is_err());
    }

    #[test]
    fn instance_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let inst = make_random_matching(8, 0.2, 9).unwrap();
        inst.save(&path).unwrap();
        let back = HardInstance::load(&path).unwrap();
        assert_eq!(back.model, inst.model);
        assert_eq!(back.family, inst.family);
    }
}
