mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use raem::geometry::Mat3;
use raem::risk::{
    average_value_at_risk, distance_distribution, distance_distribution_anisotropic, level_set_risk,
    value_at_risk, waypoint_worst_case_risk, ConfidenceLevel, DistanceDistribution, LevelSetParams,
};
use raem::scene::AnisotropicGaussian;
use raem::{IsotropicGaussian, SceneModel, Vec3};

fn eps(e: f64) -> ConfidenceLevel {
    ConfidenceLevel::new(e).unwrap()
}

fn dist(mean: f64, std: f64) -> DistanceDistribution {
    DistanceDistribution::new(mean, std).unwrap()
}

#[test]
fn avar_matches_tail_quadrature() {
    for mu in [0.0, 1.0, 2.0] {
        for sigma in [0.1, 0.5, 1.0] {
            for e in [0.05, 0.1, 0.5] {
                let d = dist(mu, sigma);
                let oracle = tail_mean_by_quadrature(&d, e);
                let got = average_value_at_risk(&d, &eps(e));
                assert!((got - oracle).abs() < 1e-6, "mu {mu} sigma {sigma} eps {e}: {got} vs {oracle}");
            }
        }
    }
}

#[test]
fn var_matches_bisected_quantile() {
    for e in [0.01, 0.05, 0.1, 0.3, 0.5, 0.9] {
        let d = dist(0.7, 0.4);
        let q = quantile_by_bisection(&d, e);
        assert!((value_at_risk(&d, &eps(e)) - q).abs() < 1e-9, "eps {e}");
    }
}

#[test]
fn n01_quantile_at_ten_percent() {
    let q = quantile_by_bisection(&dist(0.0, 1.0), 0.1);
    assert!((q + 1.28155).abs() < 1e-5);
    assert!((value_at_risk(&dist(0.0, 1.0), &eps(0.1)) - q).abs() < 1e-9);
}

#[test]
fn avar_example_from_quadrature() {
    let d = dist(2.0, 0.5);
    let oracle = tail_mean_by_quadrature(&d, 0.1);
    assert!((oracle - 1.1225).abs() < 1e-4);
    assert!((average_value_at_risk(&d, &eps(0.1)) - oracle).abs() < 1e-8);
}

#[test]
fn isotropic_signed_distance_monte_carlo() {
    let mut r = rng(11);
    for _ in 0..5 {
        let mu = Vec3::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let sigma = r.random_range(0.05..0.5);
        let p = Vec3::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let g = IsotropicGaussian::new(mu, sigma, 0.5, [0.5; 3]).unwrap();
        let d = distance_distribution(&p, &g);
        let u = (mu - p).normalize();
        let n = 200_000;
        let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let x = mu + Vec3::new(r.sample(normal), r.sample(normal), r.sample(normal));
                u.dot(&(x - p))
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - d.mean).abs() < 0.02 * sigma);
        assert!((var / (d.std * d.std) - 1.0).abs() < 0.03);
    }
}

#[test]
fn anisotropic_reduces_to_projected_variance() {
    let mut r = rng(12);
    for _ in 0..20 {
        let a = Mat3::from_fn(|_, _| r.random_range(-1.0..1.0));
        let cov = a * a.transpose() + Mat3::identity() * 0.05;
        let mu = Vec3::new(r.random_range(1.0..3.0), r.random_range(-1.0..1.0), 0.0);
        let g = AnisotropicGaussian::new(mu, cov).unwrap();
        let d = distance_distribution_anisotropic(&Vec3::zeros(), &g).unwrap();
        let u = mu.normalize();
        let mut var = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                var += u[i] * cov[(i, j)] * u[j];
            }
        }
        assert!((d.std * d.std - var).abs() < 1e-12);
        assert!((d.mean - mu.norm()).abs() < 1e-15);
    }
}

#[test]
fn worst_case_matches_exhaustive_scan() {
    let e = eps(0.1);
    let mut r = rng(13);
    for _ in 0..20 {
        let gaussians: Vec<_> = (0..50)
            .map(|_| {
                let mu = Vec3::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(0.0..2.0));
                IsotropicGaussian::new(mu, r.random_range(0.01..0.4), 0.5, [0.5; 3]).unwrap()
            })
            .collect();
        let p = Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), 0.5);
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, g) in gaussians.iter().enumerate() {
            let d = g.mu - p;
            let a = d.norm() - g.sigma() * e.kappa();
            if a < best.0 {
                best = (a, i);
            }
        }
        let got = waypoint_worst_case_risk(&p, &SceneModel::new(gaussians), &e);
        assert_eq!(got.argmin, Some(best.1));
        assert!((got.alpha - best.0).abs() < 1e-12);
    }
}

#[test]
fn level_set_branches_agree_with_avar_signs() {
    let mut r = rng(14);
    let mut middle = 0;
    for _ in 0..10_000 {
        let d = dist(r.random_range(0.0..3.0), r.random_range(0.0..1.0));
        let e = eps(r.random_range(0.01..0.99));
        let ls = LevelSetParams::new(r.random_range(0.05..2.0)).unwrap();
        let risk = level_set_risk(&d, &e, &ls);
        let avar = average_value_at_risk(&d, &e);
        assert_eq!(risk > 0.0, avar < ls.cutoff(), "{d:?} {avar} {risk}");
        assert_eq!(risk == f64::INFINITY, avar <= 0.0, "{d:?} {avar} {risk}");
        if risk > 0.0 && risk.is_finite() {
            middle += 1;
            assert!((avar - ls.cutoff() / (1.0 + risk)).abs() < 1e-9);
        }
    }
    assert!(middle > 1000);
}

#[test]
fn level_set_example_from_avar() {
    let e = eps(0.1);
    let avar = tail_mean_by_quadrature(&dist(1.2, 0.2), 0.1);
    let expect = 1.0 / avar - 1.0;
    let got = level_set_risk(&dist(1.2, 0.2), &e, &LevelSetParams::new(1.0).unwrap());
    assert!((got - expect).abs() < 1e-6);
    assert!((got - 0.178).abs() < 1e-3);
}

proptest! {
    #[test]
    fn avar_never_exceeds_var(mu in -5.0..5.0f64, sigma in 0.0..3.0f64, e in 0.001..0.999f64) {
        let d = dist(mu, sigma);
        let c = eps(e);
        prop_assert!(average_value_at_risk(&d, &c) <= value_at_risk(&d, &c) + 1e-12);
    }

    #[test]
    fn avar_monotone(mu in 0.0..5.0f64, sigma in 0.01..3.0f64, e in 0.01..0.9f64, step in 0.01..1.0f64) {
        let c = eps(e);
        let base = average_value_at_risk(&dist(mu, sigma), &c);
        prop_assert!(average_value_at_risk(&dist(mu + step, sigma), &c) > base);
        prop_assert!(average_value_at_risk(&dist(mu, sigma + step), &c) < base);
        prop_assert!(average_value_at_risk(&dist(mu, sigma), &eps(e + 0.05)) >= base);
    }

    #[test]
    fn avar_translation(mu in -3.0..3.0f64, sigma in 0.0..2.0f64, e in 0.01..0.99f64, shift in -3.0..3.0f64) {
        let c = eps(e);
        let shifted = average_value_at_risk(&dist(mu + shift, sigma), &c);
        let base = average_value_at_risk(&dist(mu, sigma), &c);
        prop_assert!((shifted - (base + shift)).abs() <= 1e-12 * (1.0 + mu.abs() + shift.abs()));
    }

    #[test]
    fn var_hits_confidence(mu in -3.0..3.0f64, sigma in 0.01..2.0f64, e in 0.001..0.999f64) {
        let v = value_at_risk(&dist(mu, sigma), &eps(e));
        prop_assert!((raem::special::normal_cdf((v - mu) / sigma) - e).abs() < 1e-9);
    }
}
