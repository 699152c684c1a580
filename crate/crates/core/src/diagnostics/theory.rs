use serde::Serialize;

use super::EmpiricalMeasure;
use crate::error::{invalid, Error, Result};
use crate::potentials::{dual_from_prox, Minibatch, NonsmoothPotential, SmoothPotential};
use crate::space::SpacePoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CEstimate {
    /// `E‖∇G‖² + 2(L d + σ_F²)`.
    pub value: f64,
    /// The `E‖∇G‖²` part, averaged over the usable samples.
    pub gradient_term: f64,
    /// Samples outside the interior of the domain, or where `G` has no
    /// gradient.
    pub skipped: usize,
}

/// `C = ∫ ‖∇G‖² dμ* + 2 (L d + σ_F²)` with the integral replaced by a
/// sample mean over `mu_star_samples`.
pub fn estimate_c(
    mu_star_samples: &EmpiricalMeasure,
    g: &dyn NonsmoothPotential,
    l: f64,
    d: usize,
    sigma_f: f64,
) -> Result<CEstimate> {
    let mut sum = 0.0;
    let mut used = 0usize;
    for x in mu_star_samples.points() {
        if let Ok(s) = g.subgradient_min(x) {
            sum += s.norm_sq();
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::NotDifferentiable(format!(
            "{} has no gradient at any of the {} samples",
            g.name(),
            mu_star_samples.len()
        )));
    }
    let gradient_term = sum / used as f64;
    Ok(CEstimate {
        value: gradient_term + 2.0 * (l * d as f64 + sigma_f * sigma_f),
        gradient_term,
        skipped: mu_star_samples.len() - used,
    })
}

/// `σ_F` as the largest spread `V_ξ ‖∇f(x, ξ)‖` over `points`, scaled by
/// `1/b` for a minibatch of size `b`. Zero for full gradients.
pub fn estimate_sigma_f(f: &dyn SmoothPotential, points: &[SpacePoint], batch: Minibatch) -> f64 {
    let b = match batch {
        Minibatch::Full => return 0.0,
        Minibatch::Size(b) => b.max(1) as f64,
    };
    let spread = points
        .iter()
        .map(|x| f.gradient_spread(x))
        .fold(0.0, f64::max);
    (spread / b).sqrt()
}

/// Slack of the one-step backward inequality for `x' = prox_{γG}(x)`,
/// `y' = (x - x')/γ`:
///
/// `‖x - x*‖² - 2γ(G*(y') - G*(y*) - ⟨y', x*⟩ + ⟨y*, x⟩)
///  - γ(λ_{G*} + γ)‖y' - y*‖² + γ²‖y*‖² - ‖x' - x*‖²`,
///
/// nonnegative whenever `y* ∈ ∂G(x*)`.
pub fn lemma2_residual(
    gamma: f64,
    x: &SpacePoint,
    x_star: &SpacePoint,
    y_star: &SpacePoint,
    g: &dyn NonsmoothPotential,
) -> Result<f64> {
    if !g.has_conjugate() {
        return Err(Error::ConjugateUnavailable);
    }
    x.check_same(x_star)?;
    x.check_same(y_star)?;
    let x_next = g.prox(gamma, x)?;
    let y_next = dual_from_prox(gamma, x, &x_next);
    let conj = g.conjugate_evaluate(&y_next)? - g.conjugate_evaluate(y_star)?;
    let coupling = conj - y_next.inner_unchecked(x_star) + y_star.inner_unchecked(x);
    Ok(x.dist_sq(x_star)
        - 2.0 * gamma * coupling
        - gamma * (g.lambda_gstar() + gamma) * y_next.dist_sq(y_star)
        + gamma * gamma * y_star.norm_sq()
        - x_next.dist_sq(x_star))
}

#[derive(Debug, Clone)]
pub struct PdpgReport {
    pub x_star: SpacePoint,
    pub y_star: SpacePoint,
    /// Per-iteration slack of the primal-dual inequality.
    pub residuals: Vec<f64>,
    /// Per-iteration `Lag(x^{k+1/2}, y*) - Lag(x*, y^{k+1})`.
    pub gaps: Vec<f64>,
}

impl PdpgReport {
    pub fn min_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn lagrangian(
    f: &dyn SmoothPotential,
    g: &dyn NonsmoothPotential,
    x: &SpacePoint,
    y: &SpacePoint,
) -> Result<f64> {
    Ok(f.evaluate(x) - g.conjugate_evaluate(y)? + x.inner_unchecked(y))
}

/// Minimizer of `F + G` by proximal gradient, `y* = -∇F(x*)`.
pub fn proximal_gradient_fixed_point(
    f: &dyn SmoothPotential,
    g: &dyn NonsmoothPotential,
    gamma: f64,
    x0: &SpacePoint,
) -> Result<(SpacePoint, SpacePoint)> {
    const MAX_ITERS: usize = 1_000_000;
    let mut x = x0.clone();
    for _ in 0..MAX_ITERS {
        let mut fwd = x.clone();
        fwd.axpy(-gamma, &f.full_gradient(&x));
        let next = g.prox(gamma, &fwd)?;
        let moved = next.dist_sq(&x).sqrt();
        x = next;
        if moved <= 1e-15 * x.norm().max(1.0) {
            let y = f.full_gradient(&x).scaled(-1.0);
            return Ok((x, y));
        }
    }
    Err(Error::NonConvergent(format!(
        "proximal gradient did not settle within {MAX_ITERS} iterations"
    )))
}

/// Runs the deterministic proximal gradient algorithm
/// `x^{k+1/2} = x^k - γ∇F(x^k)`, `x^{k+1} = prox_{γG}(x^{k+1/2})`,
/// `y^{k+1} = (x^{k+1/2} - x^{k+1})/γ` and records, per iteration, the slack of
///
/// `‖x^{k+1} - x*‖² ≤ (1 - γλ_F)‖x^k - x*‖² - γ(λ_{G*} + γ)‖y^{k+1} - y*‖²
///   - 2γ(Lag(x^{k+1/2}, y*) - Lag(x*, y^{k+1})) + γ²‖y*‖²`
///
/// with `Lag(x, y) = F(x) - G*(y) + ⟨x, y⟩`. The inequality needs
/// `γ ≤ 1/L`. The fixed point is computed when not supplied.
pub fn pdpg_gap_check(
    f: &dyn SmoothPotential,
    g: &dyn NonsmoothPotential,
    gamma: f64,
    x0: &SpacePoint,
    num_iters: usize,
    fixed_point: Option<(SpacePoint, SpacePoint)>,
) -> Result<PdpgReport> {
    if !g.has_conjugate() {
        return Err(Error::ConjugateUnavailable);
    }
    if num_iters == 0 {
        return invalid("need at least one iteration");
    }
    let (x_star, y_star) = match fixed_point {
        Some(p) => p,
        None => proximal_gradient_fixed_point(f, g, gamma, x0)?,
    };
    let lambda_f = f.strong_convexity();
    let lambda_gs = g.lambda_gstar();
    let lag_star = |y: &SpacePoint| lagrangian(f, g, &x_star, y);
    let mut x = x0.clone();
    let mut residuals = Vec::with_capacity(num_iters);
    let mut gaps = Vec::with_capacity(num_iters);
    for _ in 0..num_iters {
        let mut half = x.clone();
        half.axpy(-gamma, &f.full_gradient(&x));
        let next = g.prox(gamma, &half)?;
        let y = dual_from_prox(gamma, &half, &next);
        let gap = lagrangian(f, g, &half, &y_star)? - lag_star(&y)?;
        let rhs = (1.0 - gamma * lambda_f) * x.dist_sq(&x_star)
            - gamma * (lambda_gs + gamma) * y.dist_sq(&y_star)
            - 2.0 * gamma * gap
            + gamma * gamma * y_star.norm_sq();
        residuals.push(rhs - next.dist_sq(&x_star));
        gaps.push(gap);
        x = next;
    }
    Ok(PdpgReport {
        x_star,
        y_star,
        residuals,
        gaps,
    })
}
