use super::*;
use crate::oracles::integrate;
use crate::potentials::Minibatch;
use crate::samplers::{run_chain, SamplerConfig, SamplerKind};

fn spec(d: usize, nu: f64, data: Vec<Vec<f64>>) -> WishartExperimentSpec {
    WishartExperimentSpec::new(d, nu, data, 0).unwrap()
}

#[test]
fn data_generation() {
    let a = generate_gaussian_data(5, 3, &mut RngStream::new(1, 0)).unwrap();
    let b = generate_gaussian_data(5, 3, &mut RngStream::new(1, 0)).unwrap();
    assert_eq!(a, b);
    assert!(generate_gaussian_data(0, 3, &mut RngStream::new(1, 0)).is_err());

    let big = generate_gaussian_data(10_000, 1, &mut RngStream::new(2, 0)).unwrap();
    let mean = big.iter().map(|v| v[0]).sum::<f64>() / 1e4;
    let var = big.iter().map(|v| (v[0] - mean).powi(2)).sum::<f64>() / (1e4 - 1.0);
    assert!((var - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn spec_validation() {
    assert!(WishartExperimentSpec::new(3, 2.0, vec![], 0).is_err());
    assert!(WishartExperimentSpec::new(3, 2.5, vec![], 0).is_ok());
    assert!(WishartExperimentSpec::new(2, 4.0, vec![vec![1.0]], 0).is_err());
    assert!(TruncGaussSpec::new(0.0, 1.0, 1.0).is_err());
}

#[test]
fn ground_truth_examples() {
    // Prior mean νV with V = I.
    let g = posterior_ground_truth(&spec(1, 3.0, vec![])).unwrap();
    assert_eq!(g.m_star.coords(), &[3.0]);

    let g = posterior_ground_truth(&spec(1, 3.0, vec![vec![1.0], vec![1.0]])).unwrap();
    assert!((g.m_star.coords()[0] - 5.0 / 3.0).abs() < 1e-15);
    assert_eq!(g.posterior_nu, 5.0);

    let g = posterior_ground_truth(&spec(2, 4.0, vec![vec![1.0, 0.0]])).unwrap();
    let want = SpacePoint::from_diagonal(&[2.5, 5.0]);
    assert!(g.m_star.dist_sq(&want) < 1e-28);
}

#[test]
fn ground_truth_is_symmetric_positive_definite() {
    for seed in 0..20 {
        let s = WishartExperimentSpec::generate(5, 9.0, 30, seed).unwrap();
        let g = posterior_ground_truth(&s).unwrap();
        assert!(g.m_star.to_dense().cholesky().is_ok());
        // m* (I + Σ D Dᵀ) = (n + ν) I.
        let prod = g.m_star.to_dense().matmul(&s.posterior_v_inv());
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 39.0 } else { 0.0 };
                assert!((prod.get(i, j) - want).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn gamma_posterior_examples() {
    // ν + n = 2, Σ D² = 1: Exp(1).
    let s = spec(1, 1.0, vec![vec![1.0]]);
    assert!((gamma_posterior_quantile(&s, 0.5).unwrap() - 2f64.ln()).abs() < 1e-9);
    assert!(gamma_posterior_quantile(&s, 0.0).is_err());
    assert!(gamma_posterior_quantile(&s, 1.0).is_err());
    assert!(gamma_posterior_quantile(&spec(2, 3.0, vec![]), 0.5).is_err());
}

#[test]
fn gamma_posterior_mean_by_midpoint_rule() {
    let s = WishartExperimentSpec::generate(1, 5.0, 50, 7).unwrap();
    let n = 10_000;
    let integral: f64 = (0..n)
        .map(|i| gamma_posterior_quantile(&s, (i as f64 + 0.5) / n as f64).unwrap())
        .sum::<f64>()
        / n as f64;
    let m_star = posterior_ground_truth(&s).unwrap().m_star.coords()[0];
    assert!(
        (integral - m_star).abs() <= 1e-3 * m_star,
        "{integral} vs {m_star}"
    );
}

#[test]
fn gamma_posterior_quantiles_are_monotone_and_round_trip() {
    let s = WishartExperimentSpec::generate(1, 5.0, 50, 8).unwrap();
    let q = GammaQuantile::wishart_posterior(&s).unwrap();
    let mut prev = 0.0;
    for i in 1..100 {
        let u = i as f64 / 100.0;
        let x = gamma_posterior_quantile(&s, u).unwrap();
        assert!(x > prev);
        prev = x;
        assert!((q.cdf(x) - u).abs() < 1e-8);
    }
}

#[test]
fn gamma_cdf_against_density_quadrature() {
    let q = GammaQuantile::new(27.5, 31.2).unwrap();
    let ln_norm = q.shape * q.rate.ln() - special::ln_gamma(q.shape);
    let density = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            (ln_norm + (q.shape - 1.0) * x.ln() - q.rate * x).exp()
        }
    };
    for &x in &[0.5, 0.8, 0.9, 1.2] {
        assert!((integrate(&density, 0.0, x, 1e-13) - q.cdf(x)).abs() < 1e-9);
    }
}

#[test]
fn trunc_gauss_examples() {
    let sym = TruncGaussSpec::default();
    assert!(trunc_gauss_quantile(&sym, 0.5).unwrap().abs() < 1e-12);
    let wide = TruncGaussSpec::new(0.0, -10.0, 10.0).unwrap();
    assert!((trunc_gauss_quantile(&wide, 0.841_345).unwrap() - 1.0).abs() < 1e-4);
    for i in 1..200 {
        let u = i as f64 / 200.0;
        let x = trunc_gauss_quantile(&sym, u).unwrap();
        assert!((-1.0..=1.0).contains(&x));
        assert!((sym.cdf(x) - u).abs() < 1e-8);
    }
    let shifted = TruncGaussSpec::new(0.7, -0.5, 2.0).unwrap();
    for i in 1..100 {
        let u = i as f64 / 100.0;
        assert!((shifted.cdf(trunc_gauss_quantile(&shifted, u).unwrap()) - u).abs() < 1e-8);
    }
    assert!(trunc_gauss_quantile(&sym, 1.0).is_err());
}

#[test]
fn trunc_gauss_mean_against_quadrature() {
    let s = TruncGaussSpec::new(0.7, -0.5, 2.0).unwrap();
    let w = |x: f64| (-(x - s.mean).powi(2) / 2.0).exp();
    let z = integrate(&w, s.lo, s.hi, 1e-14);
    let mean = integrate(&|x| x * w(x), s.lo, s.hi, 1e-14) / z;
    let n = 20_000;
    let from_quantiles = (0..n)
        .map(|i| s.quantile((i as f64 + 0.5) / n as f64))
        .sum::<f64>()
        / n as f64;
    assert!((mean - from_quantiles).abs() < 1e-6);
}

#[test]
fn assembled_parameters() {
    let s = spec(1, 3.0, vec![vec![1.0], vec![-0.5]]);
    let e = assemble_experiment(&ExperimentSpec::WishartPrecision(s.clone())).unwrap();
    let g = build_gamma_potential(3.0, 2, 1).unwrap();
    assert_eq!((g.alpha(), g.beta()), (1.5, 0.5));
    assert_eq!(e.nonsmooth().name(), "logbarrier");
    assert!(e.ground_truth().is_some());
    assert!(e.quantile_oracle().is_some());

    let e = assemble_experiment(&ExperimentSpec::WishartMean1d(s)).unwrap();
    assert_eq!(build_gamma_potential(3.0, 0, 1).unwrap().alpha(), 0.5);
    assert_eq!(e.smooth().strong_convexity(), 2.0);
    assert!(matches!(e.truth, Truth::Unknown));

    let e = assemble_experiment(&ExperimentSpec::TruncGauss(TruncGaussSpec::default())).unwrap();
    assert_eq!(
        (e.smooth().smoothness(), e.smooth().strong_convexity()),
        (1.0, 1.0)
    );
    assert!(e.nonsmooth().is_indicator());
    assert!(e.quantile_oracle().is_some());

    let bad = WishartExperimentSpec {
        d: 3,
        nu: 2.5,
        data: vec![],
        data_seed: 0,
    };
    assert!(assemble_experiment(&ExperimentSpec::WishartPrecision(bad)).is_err());
}

#[test]
fn assembled_precision_target_matches_wishart_density() {
    // F + G = -log of the posterior density up to a constant:
    // ((ν' - d - 1)/2) log det x - tr(V'^{-1} x)/2.
    let s = WishartExperimentSpec::generate(3, 7.0, 4, 3).unwrap();
    let e = assemble_experiment(&ExperimentSpec::WishartPrecision(s.clone())).unwrap();
    let truth = e.ground_truth().unwrap();
    let mut rng = RngStream::new(9, 0);
    let energy = |x: &SpacePoint| e.smooth().evaluate(x) + e.nonsmooth().evaluate(x);
    let reference = |x: &SpacePoint| {
        let logdet = x.to_dense().cholesky().unwrap().log_det();
        -(truth.posterior_nu - 4.0) / 2.0 * logdet + truth.posterior_v_inv.inner(x).unwrap() / 2.0
    };
    let x0 = SpacePoint::identity(3);
    for _ in 0..20 {
        let mut x =
            crate::space::gaussian_standard(SpaceDescriptor::symmetric(3), &mut rng).scaled(0.2);
        x.axpy(1.0, &x0);
        let lhs = energy(&x) - energy(&x0);
        let rhs = reference(&x) - reference(&x0);
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }
}

#[test]
fn mean_learning_posterior_mean_by_quadrature() {
    let s = WishartExperimentSpec::generate(1, 3.0, 10, 4).unwrap();
    let e = assemble_experiment(&ExperimentSpec::WishartMean1d(s.clone())).unwrap();
    // Density ∝ x^{1/2} e^{-x/2} Π exp(-(x - D_i)²/2) on (0, ∞), built
    // directly from the data.
    let log_w = |x: f64| {
        0.5 * x.ln() - x / 2.0 - s.data.iter().map(|v| (x - v[0]).powi(2) / 2.0).sum::<f64>()
    };
    let peak = (1..4000)
        .map(|i| log_w(i as f64 * 0.005))
        .fold(f64::NEG_INFINITY, f64::max);
    let w = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            (log_w(x) - peak).exp()
        }
    };
    // Piecewise, so the adaptive rule cannot miss the narrow bulk.
    let piecewise = |f: &dyn Fn(f64) -> f64| {
        (0..200)
            .map(|k| integrate(&f, k as f64 * 0.05, (k + 1) as f64 * 0.05, 1e-15))
            .sum::<f64>()
    };
    let z = piecewise(&w);
    let mean = piecewise(&|x| x * w(x)) / z;

    let cfg = SamplerConfig {
        gamma: 0.002,
        num_steps: 400_000,
        burn_in: 2_000,
        minibatch: Minibatch::Full,
        seed: 5,
        ..SamplerConfig::default()
    };
    let t = run_chain(SamplerKind::Psgla, &e.problem, &cfg).unwrap();
    let est = crate::diagnostics::ergodic_mean(&t, 0).unwrap().coords()[0];
    assert!((est - mean).abs() < 0.02 * mean, "{est} vs {mean}");
}
