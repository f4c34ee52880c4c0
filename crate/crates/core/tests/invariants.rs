mod common;

use isingtest::testers::forest_correlations;
use isingtest::{exact_summary, log_pmf, skl_direct, skl_divergence, skl_independence_gap, tv_direct, IsingModel, SpinConfiguration};
use proptest::prelude::*;

fn sized(n: usize, theta: f64, field: f64) -> impl Strategy<Value = IsingModel> {
    let pairs = n * (n - 1) / 2;
    (
        prop::collection::vec(-field..=field, n),
        prop::collection::vec(prop::option::weighted(0.6, -theta..=theta), pairs),
    )
        .prop_map(move |(fields, weights)| {
            let mut edges = Vec::new();
            let mut i = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if let Some(t) = weights[i] {
                        edges.push((u, v, t));
                    }
                    i += 1;
                }
            }
            IsingModel::from_edges(n, fields, &edges).unwrap()
        })
}

fn model(max_n: usize, theta: f64, field: f64) -> impl Strategy<Value = IsingModel> {
    (1..=max_n).prop_flat_map(move |n| sized(n, theta, field))
}

fn model_pair(max_n: usize) -> impl Strategy<Value = (IsingModel, IsingModel)> {
    (1..=max_n).prop_flat_map(|n| (sized(n, 1.0, 1.0), sized(n, 1.0, 1.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_sum_to_one(m in model(8, 2.0, 2.0)) {
        let s = exact_summary(&m).unwrap();
        let total: f64 = (0..1usize << m.n())
            .map(|i| log_pmf(&m, &SpinConfiguration::from_index(i, m.n()), s.log_partition).unwrap().exp())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        let brute = common::probabilities(&m);
        for (i, p) in brute.iter().enumerate() {
            let lp = log_pmf(&m, &SpinConfiguration::from_index(i, m.n()), s.log_partition).unwrap();
            prop_assert!((lp.exp() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn skl_from_moments_matches_enumeration((p, q) in model_pair(7)) {
        let (mp, mq) = (exact_summary(&p).unwrap().moments(), exact_summary(&q).unwrap().moments());
        let moments = skl_divergence(&p, &mp, &q, &mq).unwrap();
        prop_assert!((moments - common::brute_skl(&p, &q)).abs() < 1e-9);
        prop_assert!((moments - skl_direct(&q, &p).unwrap()).abs() < 1e-9);
        prop_assert!(moments >= -1e-12);
        let tv = tv_direct(&p, &q).unwrap();
        prop_assert!(2.0 * tv * tv <= moments + 1e-12);
        prop_assert!(skl_direct(&p, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn independence_gap_is_skl_to_marginal_product(m in model(7, 1.0, 0.0)) {
        let s = exact_summary(&m).unwrap();
        let gap = skl_independence_gap(&m, &s).unwrap();
        let probs = common::probabilities(&m);
        let brute: f64 = m.edges().map(|(u, v, t)| t * common::pair_moment(&m, &probs, u, v)).sum();
        prop_assert!((gap - brute).abs() < 1e-10);
    }

    #[test]
    fn forest_correlations_are_path_products(n in 2usize..=10, seed in any::<u64>()) {
        let mut rng = isingtest::rng::seeded(seed);
        let m = common::random_forest(&mut rng, n, 1.5, 0.7);
        let f = forest_correlations(&m).unwrap();
        let probs = common::probabilities(&m);
        for u in 0..n {
            for v in u + 1..n {
                prop_assert!((f.edge(u, v) - common::pair_moment(&m, &probs, u, v)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_field_models_are_flip_symmetric(m in model(8, 1.5, 0.0)) {
        let s = exact_summary(&m).unwrap();
        prop_assert!(s.node_marginals.iter().all(|mu| mu.abs() < 1e-12));
        for i in 0..1usize << m.n() {
            let x = SpinConfiguration::from_index(i, m.n());
            let a = log_pmf(&m, &x, s.log_partition).unwrap();
            let b = log_pmf(&m, &x.negated(), s.log_partition).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ferromagnetic_correlations_dominate_tanh(n in 2usize..=8, seed in any::<u64>()) {
        let mut rng = isingtest::rng::seeded(seed);
        let m = common::random_ferromagnet(&mut rng, n, 1.0, 0.5);
        let s = exact_summary(&m).unwrap();
        for u in 0..n {
            for v in u + 1..n {
                prop_assert!(s.edge_marginal(u, v) >= m.edge(u, v).tanh() - 1e-12);
            }
        }
    }
}

#[test]
fn small_examples() {
    let edge = IsingModel::from_edges(2, vec![0.0; 2], &[(0, 1, 0.5)]).unwrap();
    let s = exact_summary(&edge).unwrap();
    assert!((s.log_partition - (4.0 * 0.5f64.cosh()).ln()).abs() < 1e-12);
    assert!((s.edge_marginal(0, 1) - 0.5f64.tanh()).abs() < 1e-12);
    let uniform = IsingModel::uniform(2);
    // SKL between a single edge and uniform is theta tanh theta.
    assert!((skl_direct(&edge, &uniform).unwrap() - 0.5 * 0.5f64.tanh()).abs() < 1e-12);
}
