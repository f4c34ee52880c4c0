mod common;

use isingtest::estimation::{weak_learn_sign_vector, ItemKind, ItemSource, SignVector};
use isingtest::rng::seeded;
use isingtest::sampling::ExactSampler;
use isingtest::statistics::{
    bilinear_statistic, centered_bilinear_statistic, dirichlet_form_estimate, exact_dirichlet_form, exact_variance,
    spectral_gap, variance_estimate, Statistic,
};
use isingtest::{recenter_stream, IsingModel, Result};
use rand::Rng;

#[test]
fn bilinear_variance_matches_enumeration() {
    let m = common::random_model(&mut seeded(31), 6, 0.3, 0.2, 0.6);
    let signs = SignVector::random(15, &mut seeded(32));
    let f = |x: &[i8]| bilinear_statistic(x, &signs).unwrap();
    let exact = exact_variance(&m, &f).unwrap();
    let report = variance_estimate(&Statistic::single(f), &mut ExactSampler::new(&m, 33).unwrap(), 100_000).unwrap();
    assert!((report.variance / exact - 1.0).abs() < 0.03, "{} vs {exact}", report.variance);

    // Under the uniform distribution the pair products are pairwise independent.
    let uniform = IsingModel::uniform(6);
    assert!((exact_variance(&uniform, &f).unwrap() - 15.0).abs() < 1e-9);
}

#[test]
fn centered_statistic_cancels_fields() {
    // Product model with strong fields: the centered statistic has mean zero.
    let m = IsingModel::product(vec![0.8, -0.6, 0.4, 1.0, -0.2]).unwrap();
    let signs = SignVector::constant(10, 1);
    let stat = Statistic::paired(|x, y| 0.5 * centered_bilinear_statistic(x, y, &signs).unwrap());
    let report = variance_estimate(&stat, &mut ExactSampler::new(&m, 34).unwrap(), 200_000).unwrap();
    assert_eq!(report.k_used, 400_000);
    assert!(report.mean.abs() < 4.0 * (report.variance / 200_000.0).sqrt(), "mean {}", report.mean);
}

#[test]
fn dirichlet_form_estimate_and_poincare_inequality() {
    let m = common::random_model(&mut seeded(35), 5, 0.4, 0.3, 0.7);
    let signs = SignVector::random(10, &mut seeded(36));
    let f = |x: &[i8]| bilinear_statistic(x, &signs).unwrap();
    let exact = exact_dirichlet_form(&m, &f).unwrap();
    let est = dirichlet_form_estimate(&m, &f, &mut ExactSampler::new(&m, 37).unwrap(), 200_000, &mut seeded(38)).unwrap();
    assert!((est / exact - 1.0).abs() < 0.05, "{est} vs {exact}");
    let gap = spectral_gap(&m).unwrap();
    assert!(gap > 0.0 && gap <= 1.0);
    assert!(exact_variance(&m, &f).unwrap() <= exact / gap + 1e-9);
    assert!(spectral_gap(&IsingModel::uniform(9)).is_err());
}

struct Biased {
    means: Vec<f64>,
    rng: isingtest::rng::Rng,
}

impl ItemSource for Biased {
    fn num_items(&self) -> usize {
        self.means.len()
    }

    fn observe(&mut self, out: &mut [f64]) -> Result<()> {
        for (o, &m) in out.iter_mut().zip(&self.means) {
            *o = if self.rng.random::<f64>() < 0.5 * (1.0 + m) { 1.0 } else { -1.0 };
        }
        Ok(())
    }
}

#[test]
fn weak_learning_beats_a_coin_by_the_predicted_margin() {
    let lambda = 0.1;
    let k = 100;
    let items = 2_000;
    let means: Vec<f64> = (0..items).map(|i| if i % 2 == 0 { lambda } else { -lambda }).collect();
    let mut src = Biased { means: means.clone(), rng: seeded(39) };
    let signs = weak_learn_sign_vector(&mut src, k, ItemKind::Direct, &mut seeded(40)).unwrap();
    let hits = signs.values().iter().zip(&means).filter(|(&s, &m)| f64::from(s) * m > 0.0).count();
    let rate = hits as f64 / items as f64;
    // Normal approximation: P(correct) ~ Phi(lambda sqrt k) = 0.841 for lambda sqrt k = 1.
    assert!(rate > 0.5 + 0.15 * lambda * (k as f64).sqrt(), "rate {rate}");
    assert!((rate - 0.841).abs() < 0.05, "rate {rate}");
}

#[test]
fn recentered_stream_has_half_the_offset() {
    let mut rng = seeded(41);
    let k = 200_000;
    let x: Vec<i8> = (0..k).map(|_| if rng.random::<f64>() < 0.7 { 1 } else { -1 }).collect();
    let y: Vec<i8> = (0..k).map(|_| if rng.random::<f64>() < 0.5 { 1 } else { -1 }).collect();
    let z = recenter_stream(&x, &y, &mut rng).unwrap();
    let mean = z.iter().map(|&v| f64::from(v)).sum::<f64>() / k as f64;
    // E[x] - E[y] = 0.4, and the output mean is half of that.
    assert!((mean - 0.2).abs() < 0.01, "mean {mean}");
}
