use std::sync::Arc;

use super::*;
use crate::oracles::logbarrier_prox_by_search;
use crate::space::{conjugate_by, gaussian_standard, random_orthogonal};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn max_abs_diff(a: &SpacePoint, b: &SpacePoint) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn prox_box_examples() {
    let p = prox_box(1.0, &SpacePoint::scalar(0.5), &[0.0], &[1.0]).unwrap();
    assert_eq!(p.coords(), &[0.5]);
    let p = prox_box(7.0, &SpacePoint::scalar(-3.0), &[0.0], &[1.0]).unwrap();
    assert_eq!(p.coords(), &[0.0]);
    let p = prox_box(
        1.0,
        &SpacePoint::from_vec(vec![2.4, -0.1]),
        &[0.0, 0.0],
        &[1.0, 1.0],
    )
    .unwrap();
    assert_eq!(p.coords(), &[1.0, 0.0]);
    assert!(prox_box(1.0, &SpacePoint::scalar(0.0), &[1.0], &[0.0]).is_err());
    assert!(BoxIndicator::interval(2.0, 1.0).is_err());
}

#[test]
fn prox_psd_examples() {
    assert_eq!(
        prox_psd(1.0, &SpacePoint::identity(2)).unwrap(),
        SpacePoint::identity(2)
    );
    assert_eq!(
        prox_psd(0.3, &SpacePoint::from_diagonal(&[1.0, -2.0])).unwrap(),
        SpacePoint::from_diagonal(&[1.0, 0.0])
    );
    let z = prox_psd(2.0, &SpacePoint::identity(3).scaled(-1.0)).unwrap();
    assert!(z.coords().iter().all(|&v| v == 0.0));
}

#[test]
fn prox_logbarrier_scalar_examples() {
    let t = prox_logbarrier_scalar(1.0, 1.0, 0.5, 0.5).unwrap();
    assert!(close(t, 1.0, 1e-15));
    assert!(close(
        t,
        logbarrier_prox_by_search(1.0, 1.0, 0.5, 0.5),
        1e-10
    ));
    let t = prox_logbarrier_scalar(1.0, 0.0, 1.0, 0.0).unwrap();
    assert!(close(t, 1.0, 1e-15));
    assert!(close(
        t,
        logbarrier_prox_by_search(1.0, 0.0, 1.0, 0.0),
        1e-10
    ));
    assert_eq!(prox_logbarrier_scalar(1.0, 2.0, 0.0, 0.0).unwrap(), 2.0);
    assert!(prox_logbarrier_scalar(1.0, 2.0, -0.1, 0.0).is_err());
    assert!(prox_logbarrier_scalar(0.0, 2.0, 1.0, 0.0).is_err());
}

#[test]
fn prox_logbarrier_scalar_far_negative_input_stays_positive() {
    // The naive (b + sqrt(b² + 4c))/2 cancels to zero here.
    let t = prox_logbarrier_scalar(1.0, -1e9, 1.0, 0.0).unwrap();
    assert!(t > 0.0);
    assert!(close(t, 1e-9, 1e-20));
}

#[test]
fn prox_logdet_examples() {
    let p = prox_logdet(1.0, &SpacePoint::identity(2), 0.5, 0.5).unwrap();
    assert!(max_abs_diff(&p, &SpacePoint::identity(2)) < 1e-14);
    let p = prox_logdet(1.0, &SpacePoint::from_diagonal(&[0.0, 2.0]), 0.5, 0.5).unwrap();
    let want = SpacePoint::from_diagonal(&[0.5, (1.5 + 4.25f64.sqrt()) / 2.0]);
    assert!(max_abs_diff(&p, &want) < 1e-14);
    assert!(close(want.get(1, 1), 1.780_776_4, 1e-7));
    assert!(close(
        p.get(0, 0),
        logbarrier_prox_by_search(1.0, 0.0, 0.5, 0.5),
        1e-10
    ));
    assert!(close(
        p.get(1, 1),
        logbarrier_prox_by_search(1.0, 2.0, 0.5, 0.5),
        1e-10
    ));
}

#[test]
fn prox_logdet_rotation_equivariance() {
    let mut rng = RngStream::new(21, 0);
    for _ in 0..50 {
        let s = gaussian_standard(SpaceDescriptor::symmetric(4), &mut rng).scaled(2.0);
        let q = random_orthogonal(4, &mut rng);
        let lhs = prox_logdet(0.7, &conjugate_by(&q, &s), 1.5, 0.5).unwrap();
        let rhs = conjugate_by(&q, &prox_logdet(0.7, &s, 1.5, 0.5).unwrap());
        assert!(max_abs_diff(&lhs, &rhs) < 1e-9);
    }
}

#[test]
fn prox_logdet_matches_scalar_search() {
    let mut rng = RngStream::new(22, 0);
    for d in [2, 5, 10] {
        for _ in 0..10 {
            let s = gaussian_standard(SpaceDescriptor::symmetric(d), &mut rng).scaled(3.0);
            let gamma = 0.05 + 3.0 * rng.uniform();
            let alpha = 4.0 * rng.uniform();
            let beta = rng.uniform() - 0.5;
            let got = prox_logdet(gamma, &s, alpha, beta).unwrap();
            let eig = crate::space::sym_eigendecomposition(&s).unwrap();
            let want = eig.reconstruct_with(|l| logbarrier_prox_by_search(gamma, l, alpha, beta));
            assert!(max_abs_diff(&got, &want) < 1e-8);
        }
    }
}

#[test]
fn dual_from_primal_examples() {
    let zero = ZeroPotential::new(SpaceDescriptor::flat(2));
    let y = dual_from_primal(0.4, &SpacePoint::from_vec(vec![3.0, -1.0]), &zero).unwrap();
    assert_eq!(y.coords(), &[0.0, 0.0]);
    let unit = BoxIndicator::interval(0.0, 1.0).unwrap();
    assert_eq!(
        dual_from_primal(2.0, &SpacePoint::scalar(3.0), &unit)
            .unwrap()
            .coords(),
        &[1.0]
    );
    assert_eq!(
        dual_from_primal(2.0, &SpacePoint::scalar(0.5), &unit)
            .unwrap()
            .coords(),
        &[0.0]
    );
}

#[test]
fn moreau_gradient_examples() {
    let unit = BoxIndicator::interval(0.0, 1.0).unwrap();
    assert_eq!(
        moreau_gradient(0.5, &SpacePoint::scalar(0.3), &unit)
            .unwrap()
            .coords(),
        &[0.0]
    );
    assert_eq!(
        moreau_gradient(0.5, &SpacePoint::scalar(2.0), &unit)
            .unwrap()
            .coords(),
        &[2.0]
    );
    assert!(moreau_gradient(0.0, &SpacePoint::scalar(2.0), &unit).is_err());

    // |∇G^λ(2)| ≤ |G'(2)| = 1/2 for G = -log x.
    let barrier = LogBarrier::new(SpaceDescriptor::flat(1), 1.0, 0.0).unwrap();
    for lambda in [1e-3, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0] {
        let g = moreau_gradient(lambda, &SpacePoint::scalar(2.0), &barrier).unwrap();
        assert!(
            g.coords()[0].abs() <= 0.5 + 1e-15,
            "λ={lambda}: {}",
            g.coords()[0]
        );
    }
}

#[test]
fn moreau_gradient_is_inverse_lambda_lipschitz() {
    let mut rng = RngStream::new(23, 0);
    let pots: Vec<Arc<dyn NonsmoothPotential>> = vec![
        Arc::new(BoxIndicator::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap()),
        Arc::new(LogBarrier::new(SpaceDescriptor::flat(2), 1.0, 0.5).unwrap()),
        Arc::new(LogBarrier::new(SpaceDescriptor::symmetric(3), 2.0, 0.5).unwrap()),
        Arc::new(PsdIndicator::new(3)),
    ];
    for g in &pots {
        for _ in 0..200 {
            let lambda = 0.01 + 2.0 * rng.uniform();
            let x = gaussian_standard(g.descriptor(), &mut rng).scaled(2.0);
            let y = gaussian_standard(g.descriptor(), &mut rng).scaled(2.0);
            let gx = moreau_gradient(lambda, &x, g.as_ref()).unwrap();
            let gy = moreau_gradient(lambda, &y, g.as_ref()).unwrap();
            let lhs = gx.dist_sq(&gy).sqrt();
            let rhs = x.dist_sq(&y).sqrt() / lambda;
            assert!(
                lhs <= rhs * (1.0 + 1e-9) + 1e-12,
                "{}: {lhs} > {rhs}",
                g.name()
            );
        }
    }
}

#[test]
fn gamma_potential_parameters() {
    let g = build_gamma_potential(3.0, 0, 1).unwrap();
    assert_eq!((g.alpha(), g.beta()), (0.5, 0.5));
    assert_eq!(g.evaluate(&SpacePoint::scalar(-1.0)), f64::INFINITY);
    let g2 = build_gamma_potential(4.0, 1, 2).unwrap();
    assert!(g2.in_domain(&SpacePoint::identity(2)));
    assert!(!g2.in_domain(&SpacePoint::from_diagonal(&[1.0, -1.0])));
    assert!(!g2.has_conjugate());
    assert!(matches!(
        g2.conjugate_evaluate(&SpacePoint::identity(2)),
        Err(Error::ConjugateUnavailable)
    ));
    assert!(build_gamma_potential(0.5, 0, 3).is_err());
}

#[test]
fn logdet_evaluate_and_gradient() {
    let g = LogBarrier::new(SpaceDescriptor::symmetric(2), 2.0, 0.5).unwrap();
    let x = SpacePoint::from_diagonal(&[2.0, 4.0]);
    assert!(close(g.evaluate(&x), -2.0 * 8f64.ln() + 3.0, 1e-14));
    let sg = g.subgradient_min(&x).unwrap();
    assert!(max_abs_diff(&sg, &SpacePoint::from_diagonal(&[-0.5, 0.0])) < 1e-14);
    assert!(g
        .subgradient_min(&SpacePoint::from_diagonal(&[1.0, -1.0]))
        .is_err());
}

#[test]
fn indicator_subgradients() {
    let b = BoxIndicator::interval(0.0, 1.0).unwrap();
    assert_eq!(
        b.subgradient_min(&SpacePoint::scalar(0.5))
            .unwrap()
            .coords(),
        &[0.0]
    );
    assert!(b.subgradient_min(&SpacePoint::scalar(1.0)).is_err());
    assert!(b.subgradient_min(&SpacePoint::scalar(3.0)).is_err());
    let p = PsdIndicator::new(2);
    assert!(p.subgradient_min(&SpacePoint::identity(2)).is_ok());
    assert!(p
        .subgradient_min(&SpacePoint::from_diagonal(&[1.0, 0.0]))
        .is_err());
}

#[test]
fn conjugates() {
    let b = BoxIndicator::new(vec![0.0, -1.0], vec![1.0, 2.0]).unwrap();
    assert_eq!(
        b.conjugate_evaluate(&SpacePoint::from_vec(vec![3.0, -2.0]))
            .unwrap(),
        3.0 + 2.0
    );
    let p = PsdIndicator::new(2);
    assert_eq!(
        p.conjugate_evaluate(&SpacePoint::from_diagonal(&[-1.0, 0.0]))
            .unwrap(),
        0.0
    );
    assert_eq!(
        p.conjugate_evaluate(&SpacePoint::from_diagonal(&[-1.0, 0.1]))
            .unwrap(),
        f64::INFINITY
    );
    let l1 = L1Norm::new(SpaceDescriptor::flat(2), 0.5).unwrap();
    assert_eq!(
        l1.conjugate_evaluate(&SpacePoint::from_vec(vec![0.5, -0.2]))
            .unwrap(),
        0.0
    );
    assert_eq!(
        l1.conjugate_evaluate(&SpacePoint::from_vec(vec![0.6, 0.0]))
            .unwrap(),
        f64::INFINITY
    );
}

#[test]
fn l1_prox_is_soft_threshold() {
    let l1 = L1Norm::new(SpaceDescriptor::flat(3), 1.0).unwrap();
    let p = l1
        .prox(1.0, &SpacePoint::from_vec(vec![3.0, -0.5, -2.0]))
        .unwrap();
    assert_eq!(p.coords(), &[2.0, 0.0, -1.0]);
    // Matrix variant: off-diagonal entries shrink by the same amount.
    let m = L1Norm::new(SpaceDescriptor::symmetric(2), 0.5).unwrap();
    let x = SpacePoint::from_dense(2, &[2.0, 1.0, 1.0, -0.25]).unwrap();
    let p = m.prox(1.0, &x).unwrap();
    assert_eq!(p, SpacePoint::from_dense(2, &[1.5, 0.5, 0.5, 0.0]).unwrap());
}

#[test]
fn quadratic_sum_examples() {
    let f = build_quadratic_sum(vec![SpacePoint::scalar(0.0)]).unwrap();
    let x = SpacePoint::scalar(2.0);
    assert_eq!(f.full_gradient(&x).coords(), &[2.0]);
    assert_eq!(f.evaluate(&x), 2.0);

    let f = build_quadratic_sum(vec![SpacePoint::scalar(1.0), SpacePoint::scalar(3.0)]).unwrap();
    let x = SpacePoint::scalar(0.0);
    assert_eq!(f.full_gradient(&x).coords(), &[-4.0]);
    assert_eq!(f.strong_convexity(), 2.0);
    let mean = (f.term_gradient(&x, 0).coords()[0] + f.term_gradient(&x, 1).coords()[0]) / 2.0;
    assert_eq!(mean, -4.0);
    assert!(build_quadratic_sum(vec![]).is_err());
}

#[test]
fn precision_likelihood_examples() {
    let f = build_precision_likelihood(&[vec![1.0, 0.0]]).unwrap();
    let x = SpacePoint::identity(2);
    assert_eq!(f.evaluate(&x), 0.5);
    assert_eq!(
        f.full_gradient(&x),
        SpacePoint::from_dense(2, &[0.5, 0.0, 0.0, 0.0]).unwrap()
    );

    let data = vec![
        vec![1.0, -2.0, 0.5],
        vec![0.3, 0.1, 1.0],
        vec![-1.0, 1.0, 2.0],
    ];
    let f = build_precision_likelihood(&data).unwrap();
    let mut rng = RngStream::new(24, 0);
    let a = gaussian_standard(f.descriptor(), &mut rng);
    let b = gaussian_standard(f.descriptor(), &mut rng);
    assert_eq!(f.full_gradient(&a), f.full_gradient(&b));
    let mut avg = SpacePoint::zeros(f.descriptor());
    for i in 0..3 {
        avg.axpy(1.0 / 3.0, &f.term_gradient(&a, i));
    }
    assert!(max_abs_diff(&avg, &f.full_gradient(&a)) < 1e-14);
    // tr(D Dᵀ x)/2 = Dᵀ x D / 2.
    let x = SpacePoint::from_dense(3, &[2.0, 0.5, 0.0, 0.5, 1.0, -0.3, 0.0, -0.3, 3.0]).unwrap();
    let dense = x.to_dense();
    let want: f64 = data
        .iter()
        .map(|v| {
            v.iter()
                .zip(dense.matvec(v))
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / 2.0
        })
        .sum();
    assert!(close(f.evaluate(&x), want, 1e-13));
    assert!(build_precision_likelihood(&[]).is_err());
    assert_eq!(
        build_precision_likelihood(&[vec![2.0]])
            .unwrap()
            .descriptor(),
        SpaceDescriptor::flat(1)
    );
}

#[test]
fn smooth_potential_invariants() {
    let mut rng = RngStream::new(25, 0);
    let data: Vec<SpacePoint> = (0..7)
        .map(|_| gaussian_standard(SpaceDescriptor::flat(3), &mut rng))
        .collect();
    let f = build_quadratic_sum(data).unwrap();
    for _ in 0..200 {
        let x = gaussian_standard(f.descriptor(), &mut rng).scaled(3.0);
        let y = gaussian_standard(f.descriptor(), &mut rng).scaled(3.0);
        let gx = f.full_gradient(&x);
        let gy = f.full_gradient(&y);
        assert!(gx.dist_sq(&gy).sqrt() <= f.smoothness() * x.dist_sq(&y).sqrt() * (1.0 + 1e-12));
        let lower = f.evaluate(&x)
            + gx.inner(&y.sub(&x)).unwrap()
            + f.strong_convexity() / 2.0 * x.dist_sq(&y);
        assert!(f.evaluate(&y) >= lower - 1e-9 * lower.abs().max(1.0));
    }
}

#[test]
fn stochastic_gradient_variance_matches_spread() {
    let mut rng = RngStream::new(26, 0);
    let data: Vec<SpacePoint> = (0..10)
        .map(|_| gaussian_standard(SpaceDescriptor::flat(2), &mut rng))
        .collect();
    let f = build_quadratic_sum(data).unwrap();
    let x = SpacePoint::from_vec(vec![0.7, -1.2]);
    let sigma2 = f.gradient_spread(&x);
    let draws: Vec<f64> = (0..10_000)
        .map(|_| {
            f.stochastic_gradient(&x, Minibatch::Size(1), &mut rng)
                .norm()
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    assert!(var <= sigma2 * 1.1, "{var} vs {sigma2}");
    assert!(var >= sigma2 * 0.9, "{var} vs {sigma2}");

    // Minibatch averages stay unbiased.
    let mut acc = SpacePoint::zeros(f.descriptor());
    let reps = 20_000;
    for _ in 0..reps {
        acc.axpy(
            1.0 / reps as f64,
            &f.stochastic_gradient(&x, Minibatch::Size(4), &mut rng),
        );
    }
    let full = f.full_gradient(&x);
    assert!(acc.dist_sq(&full).sqrt() < 0.05 * full.norm().max(1.0));
}

#[test]
fn lipschitz_term_second_moment() {
    let desc = SpaceDescriptor::symmetric(3);
    let r = LipschitzProxTerm::l1(desc, &[0.1, 0.2, 0.4]).unwrap();
    let mut rng = RngStream::new(27, 0);
    for _ in 0..100 {
        let x = gaussian_standard(desc, &mut rng);
        let m2 = r.subgradient_second_moment(&x).unwrap();
        assert!(m2 <= r.m_bound().powi(2) * 1.1);
    }
    assert!(LipschitzProxTerm::zero().is_zero());
    assert!(LipschitzProxTerm::zero().draw(&mut rng).is_none());
}
