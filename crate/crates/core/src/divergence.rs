//! Symmetric KL divergence from moments.

use crate::error::{Error, Result};
use crate::estimation::MomentTable;
use crate::exact::ExactSummary;
use crate::model::IsingModel;

/// `sum_v (theta^p_v - theta^q_v)(mu^p_v - mu^q_v) + sum_{u<v} (theta^p_uv - theta^q_uv)(mu^p_uv - mu^q_uv)`.
///
/// Exact moments give the divergence itself; empirical moments give an estimate.
pub fn skl_divergence(p: &IsingModel, p_moments: &MomentTable, q: &IsingModel, q_moments: &MomentTable) -> Result<f64> {
    let n = p.n();
    if q.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.n() });
    }
    for m in [p_moments, q_moments] {
        if m.n != n {
            return Err(Error::IncompleteMoments(format!("table covers {} nodes, model has {n}", m.n)));
        }
    }
    let mut total = 0.0;
    for u in 0..n {
        total += (p.node(u) - q.node(u)) * (p_moments.node(u) - q_moments.node(u));
        for v in u + 1..n {
            let dt = p.edge(u, v) - q.edge(u, v);
            if dt != 0.0 {
                total += dt * (p_moments.edge(u, v) - q_moments.edge(u, v));
            }
        }
    }
    Ok(total)
}

/// `sum_e theta_e (mu_e - mu_u mu_v)`: divergence from the product model with
/// the same node marginals, an upper bound on the distance to the set of
/// product distributions.
pub fn skl_independence_gap(p: &IsingModel, p_summary: &ExactSummary) -> Result<f64> {
    if p_summary.n != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), got: p_summary.n });
    }
    Ok(p.edges().map(|(u, v, t)| t * p_summary.covariance(u, v)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_summary, skl_direct};

    fn edge(theta: f64) -> IsingModel {
        IsingModel::from_edges(2, vec![0.0; 2], &[(0, 1, theta)]).unwrap()
    }

    fn skl(p: &IsingModel, q: &IsingModel) -> f64 {
        let (mp, mq) = (exact_summary(p).unwrap().moments(), exact_summary(q).unwrap().moments());
        skl_divergence(p, &mp, q, &mq).unwrap()
    }

    #[test]
    fn examples() {
        let p = edge(0.5);
        assert_eq!(skl(&p, &p), 0.0);
        let d = skl(&p, &edge(0.3));
        assert!((d - 0.2 * (0.5f64.tanh() - 0.3f64.tanh())).abs() < 1e-12);
        assert!((d - 0.034_161).abs() < 1e-6);
        let d = skl(&p, &IsingModel::uniform(2));
        assert!((d - 0.231_059).abs() < 1e-6);
        assert!((d - skl(&IsingModel::uniform(2), &p)).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_enumeration() {
        let p = IsingModel::from_edges(3, vec![0.2, -0.4, 0.1], &[(0, 1, 0.7), (1, 2, -0.3)]).unwrap();
        let q = IsingModel::from_edges(3, vec![0.0, 0.3, 0.0], &[(0, 2, 0.5)]).unwrap();
        assert!((skl(&p, &q) - skl_direct(&p, &q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mismatches_are_errors() {
        let m2 = exact_summary(&edge(0.1)).unwrap().moments();
        let u3 = IsingModel::uniform(3);
        assert!(skl_divergence(&edge(0.1), &m2, &u3, &m2).is_err());
        let m3 = MomentTable::uniform(3);
        assert!(skl_divergence(&u3, &m2, &u3, &m3).is_err());
    }

    #[test]
    fn independence_gap_examples() {
        let prod = IsingModel::product(vec![0.3, -0.2]).unwrap();
        assert_eq!(skl_independence_gap(&prod, &exact_summary(&prod).unwrap()).unwrap(), 0.0);

        let p = edge(0.5);
        let g = skl_independence_gap(&p, &exact_summary(&p).unwrap()).unwrap();
        assert!((g - 0.231_059).abs() < 1e-6);

        // Fields on both ends: hand enumeration of the four states.
        let p = IsingModel::from_edges(2, vec![0.3, 0.3], &[(0, 1, 0.5)]).unwrap();
        let w = |a: f64, b: f64| (0.3 * a + 0.3 * b + 0.5 * a * b).exp();
        let z = w(1., 1.) + w(1., -1.) + w(-1., 1.) + w(-1., -1.);
        let mu_uv = (w(1., 1.) + w(-1., -1.) - w(1., -1.) - w(-1., 1.)) / z;
        let mu_u = (w(1., 1.) + w(1., -1.) - w(-1., 1.) - w(-1., -1.)) / z;
        let g = skl_independence_gap(&p, &exact_summary(&p).unwrap()).unwrap();
        assert!((g - 0.5 * (mu_uv - mu_u * mu_u)).abs() < 1e-12);
    }
}
