mod common;

use isingtest::calibration::desk_corpus;
use isingtest::estimation::SignVector;
use isingtest::harness::{run_tester, TesterKind};
use isingtest::model::PairIndex;
use isingtest::rng::seeded;
use isingtest::sampling::{ExactSampler, FlippedSource, ReplaySource};
use isingtest::testers::{
    flag_discrepant_pairs, test_identity_forest, test_independence_ferro, test_independence_forest,
    test_independence_localization, LttMode, LttPlan, Promise, Reference, WitnessKind,
};
use isingtest::{exact_draw, exact_summary, Constants, IsingModel, TestVerdict, TesterConfig};

fn check_witness(v: &TestVerdict, n: usize) {
    match (&v.witness, v.is_reject()) {
        (None, false) => {}
        (Some(w), true) => {
            match w.kind {
                WitnessKind::Edge => {
                    assert_eq!(w.identifier.len(), 2);
                    assert!(w.identifier[0] < w.identifier[1] && w.identifier[1] < n);
                }
                WitnessKind::Node => assert!(w.identifier.len() == 1 && w.identifier[0] < n),
                WitnessKind::Statistic => assert_eq!(w.identifier.len(), 2),
                WitnessKind::Promise => assert_eq!(v.promise, Promise::Violated),
            }
            assert!(w.observed >= w.threshold, "{w:?}");
        }
        other => panic!("decision and witness disagree: {other:?}"),
    }
}

#[test]
fn every_rejection_carries_a_valid_witness() {
    for kind in TesterKind::ALL {
        let corpus = desk_corpus(kind, Constants::default()).unwrap();
        let reference = corpus.reference.as_ref().map(|q| (q.clone(), exact_summary(q).unwrap().moments()));
        for (i, m) in corpus.null.iter().chain(&corpus.far).enumerate() {
            // Small budgets so that both outcomes show up.
            for (j, budget) in [200usize, 2_000, 20_000].into_iter().enumerate() {
                let mut src = ExactSampler::new(m, (i * 10 + j) as u64).unwrap();
                let cfg = corpus.config.clone().with_budget(budget);
                let v = run_tester(kind, &mut src, reference.as_ref().map(|(q, mq)| (q, mq)), &cfg).unwrap();
                check_witness(&v, m.n());
                assert!(v.samples_used <= budget + budget / 20 + 4, "{kind}: {} > {budget}", v.samples_used);
            }
        }
    }
}

#[test]
fn larger_epsilon_never_adds_rejections() {
    let m = IsingModel::from_edges(8, vec![0.0; 8], &[(0, 1, 0.15), (2, 5, 0.1), (3, 7, 0.05)]).unwrap();
    let batch = exact_draw(&m, 3_000, 17).unwrap();
    let run = |tester: &dyn Fn(&mut ReplaySource, &TesterConfig) -> TestVerdict, eps: f64| {
        let cfg = TesterConfig::new(eps, 0).with_beta(0.5).with_max_degree(2).with_edge_bound(3).with_budget(3_000);
        tester(&mut ReplaySource::new(batch.clone()), &cfg).is_reject()
    };
    let testers: [&dyn Fn(&mut ReplaySource, &TesterConfig) -> TestVerdict; 3] = [
        &|s, c| test_independence_localization(s, c).unwrap(),
        &|s, c| test_independence_forest(s, c).unwrap(),
        &|s, c| test_independence_ferro(s, c).unwrap(),
    ];
    for tester in testers {
        let decisions: Vec<bool> = [0.01, 0.02, 0.05, 0.1, 0.3, 1.0, 5.0].iter().map(|&e| run(tester, e)).collect();
        assert!(decisions.windows(2).all(|w| w[0] || !w[1]), "{decisions:?}");
        assert!(decisions[0] && !decisions[6], "{decisions:?}");
    }
}

#[test]
fn independence_testers_ignore_a_global_flip() {
    let m = IsingModel::from_edges(6, vec![0.0; 6], &[(0, 1, 0.3), (2, 3, -0.2)]).unwrap();
    let cfg = TesterConfig::new(0.2, 5).with_beta(0.3).with_max_degree(1);
    for kind in [TesterKind::LocInd, TesterKind::ForestInd, TesterKind::FerroInd, TesterKind::LttInd] {
        let plain = run_tester(kind, &mut ExactSampler::new(&m, 3).unwrap(), None, &cfg).unwrap();
        let flipped = run_tester(kind, &mut FlippedSource(ExactSampler::new(&m, 3).unwrap()), None, &cfg).unwrap();
        assert_eq!(plain.decision, flipped.decision, "{kind}");
        assert!((plain.statistic - flipped.statistic).abs() < 1e-12, "{kind}");
    }
}

#[test]
fn localization_recovers_the_dependent_pairs() {
    // Only the edges of a disjoint-edge model have nonzero covariance.
    let edges = [(0, 4, 0.4), (1, 7, -0.3), (2, 3, 0.25)];
    let m = IsingModel::from_edges(10, vec![0.2; 10], &edges).unwrap();
    let threshold = 0.2;
    let k = (24.0 * (10f64).ln() / (threshold * threshold)).ceil() as usize;
    let s = exact_summary(&m).unwrap();
    for seed in 0..20 {
        let batch = exact_draw(&m, k, seed).unwrap();
        let flags = flag_discrepant_pairs(&batch, Reference::Independence, threshold).unwrap();
        let mut found: Vec<(usize, usize)> = flags.iter().map(|f| f.item).collect();
        found.sort();
        let expected: Vec<(usize, usize)> =
            edges.iter().filter(|&&(u, v, _)| s.covariance(u, v).abs() >= threshold).map(|&(u, v, _)| (u, v)).collect();
        assert!(expected.iter().all(|e| found.contains(e)), "seed {seed}: {found:?}");
        assert!(found.iter().all(|&(u, v)| m.edge(u, v) != 0.0), "seed {seed}: {found:?}");
    }
}

#[test]
fn forest_identity_flags_a_cyclic_reference() {
    let cycle = IsingModel::from_edges(3, vec![0.0; 3], &[(0, 1, 0.2), (1, 2, 0.2), (0, 2, 0.2)]).unwrap();
    let v = test_identity_forest(&mut ExactSampler::new(&cycle, 1).unwrap(), &cycle, &TesterConfig::new(0.1, 0)).unwrap();
    assert!(v.is_reject());
    assert_eq!(v.promise, Promise::Violated);
    assert_eq!(v.witness.unwrap().kind, WitnessKind::Promise);
    assert_eq!(v.samples_used, 0);

    let tree = IsingModel::from_edges(3, vec![0.0; 3], &[(0, 1, 0.2), (1, 2, 0.2)]).unwrap();
    let v = test_identity_forest(&mut ExactSampler::new(&tree, 1).unwrap(), &tree, &TesterConfig::new(0.1, 0)).unwrap();
    assert_eq!(v.promise, Promise::Confirmed);
}

#[test]
fn learn_then_test_plans_respect_budgets() {
    let q = common::random_model(&mut seeded(1), 6, 0.2, 0.0, 0.5);
    let mq = exact_summary(&q).unwrap().moments();
    let cfg = TesterConfig::new(0.2, 0).with_beta(0.2);
    let field_cfg = cfg.clone().with_field_bound(0.3);
    for (mode, c) in [
        (LttMode::independence(&cfg), &cfg),
        (LttMode::independence(&field_cfg), &field_cfg),
        (LttMode::identity(&q, &mq, &cfg), &cfg),
        (LttMode::identity(&q, &mq, &field_cfg), &field_cfg),
    ] {
        let full = LttPlan::build(6, &mode, c).unwrap();
        for budget in [1_000, 10_000, 100_000] {
            let plan = LttPlan::build(6, &mode, &c.clone().with_budget(budget)).unwrap();
            let total = plan.total_samples() as f64;
            assert!((total / budget as f64 - 1.0).abs() < 0.1 || budget < full.phases.len() * 50, "{total} vs {budget}");
            assert_eq!(plan.phases.len(), full.phases.len());
            assert!(plan.phases.iter().all(|p| p.chebyshev.groups % 2 == 1));
        }
    }
}

#[test]
fn learned_signs_align_with_couplings() {
    // Majority signs of the pair products match the signs of the true correlations.
    let m = common::random_model(&mut seeded(2), 8, 0.1, 0.0, 1.0);
    let batch = exact_draw(&m, 4_000, 3).unwrap();
    let mut sums = vec![0.0; 28];
    for x in batch.rows() {
        let mut i = 0;
        for u in 0..8 {
            for v in u + 1..8 {
                sums[i] += f64::from(x[u] * x[v]);
                i += 1;
            }
        }
    }
    let signs = SignVector::from_signs(&sums);
    let probs = common::probabilities(&m);
    let mut agree = 0;
    let mut total = 0;
    for (u, v, t) in m.edges() {
        if t.abs() > 0.05 {
            total += 1;
            let mu = common::pair_moment(&m, &probs, u, v);
            agree += usize::from(f64::from(signs.get(PairIndex::new(8).index(u, v))) * mu > 0.0);
        }
    }
    assert!(agree * 10 >= total * 8, "{agree} of {total}");
}
