//! Potential catalog: smooth parts `F` accessed through (stochastic)
//! gradients, nonsmooth parts `G` accessed through proximity operators.

mod lipschitz;
mod nonsmooth;
mod smooth;

use std::fmt;

pub use lipschitz::LipschitzProxTerm;
pub use nonsmooth::{
    prox_box, prox_logbarrier_scalar, prox_logdet, prox_psd, BoxIndicator, L1Norm, LogBarrier,
    PsdIndicator, ZeroPotential,
};
pub use smooth::{
    build_precision_likelihood, build_quadratic_sum, PrecisionLikelihood, Quadratic, QuadraticSum,
};

use crate::error::{invalid, Error, Result};
use crate::space::{RngStream, SpaceDescriptor, SpacePoint};

/// How many summands a stochastic gradient averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Minibatch {
    Full,
    Size(usize),
}

impl Default for Minibatch {
    fn default() -> Self {
        Minibatch::Size(1)
    }
}

/// Smooth convex `F(x) = E_ξ f(x, ξ)`, realized as a finite sum over
/// `num_terms()` components with `ξ` uniform.
pub trait SmoothPotential: Send + Sync + fmt::Debug {
    fn descriptor(&self) -> SpaceDescriptor;

    fn evaluate(&self, x: &SpacePoint) -> f64;

    fn full_gradient(&self, x: &SpacePoint) -> SpacePoint;

    fn num_terms(&self) -> usize;

    /// `∇f(x, i)`: the gradient of component `i` rescaled by `num_terms()`
    /// so that its uniform average is `∇F(x)`.
    fn term_gradient(&self, x: &SpacePoint, i: usize) -> SpacePoint;

    /// Lipschitz constant `L` of `∇F`.
    fn smoothness(&self) -> f64;

    /// Strong-convexity constant `λ_F` (0 when merely convex).
    fn strong_convexity(&self) -> f64;

    /// Unbiased gradient estimate. Indices are drawn uniformly with
    /// replacement; a minibatch averages `b` single-index estimates.
    fn stochastic_gradient(
        &self,
        x: &SpacePoint,
        batch: Minibatch,
        rng: &mut RngStream,
    ) -> SpacePoint {
        let n = self.num_terms();
        match batch {
            Minibatch::Full => self.full_gradient(x),
            Minibatch::Size(_) if n == 1 => self.full_gradient(x),
            Minibatch::Size(b) => {
                let mut g = self.term_gradient(x, rng.index(n));
                for _ in 1..b {
                    g.axpy(1.0, &self.term_gradient(x, rng.index(n)));
                }
                if b > 1 {
                    g.scale(1.0 / b as f64);
                }
                g
            }
        }
    }

    /// `Var_ξ ‖∇f(x, ξ)‖` computed exactly over the components.
    ///
    /// This is the local value of σ_F² at `x`; for finite sums it is in
    /// general not bounded uniformly in `x`.
    fn gradient_spread(&self, x: &SpacePoint) -> f64 {
        let n = self.num_terms();
        if n <= 1 {
            return 0.0;
        }
        let norms: Vec<f64> = (0..n).map(|i| self.term_gradient(x, i).norm()).collect();
        let mean = norms.iter().sum::<f64>() / n as f64;
        norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64
    }
}

/// Proper convex lower-semicontinuous `G`, possibly taking `+∞`.
pub trait NonsmoothPotential: Send + Sync + fmt::Debug {
    fn descriptor(&self) -> SpaceDescriptor;

    /// Short identifier used in reports.
    fn name(&self) -> &'static str;

    /// `G(x)`, `+∞` outside the domain.
    fn evaluate(&self, x: &SpacePoint) -> f64;

    /// `argmin_z G(z) + ‖z - x‖² / (2γ)`.
    fn prox(&self, gamma: f64, x: &SpacePoint) -> Result<SpacePoint>;

    fn in_domain(&self, x: &SpacePoint) -> bool;

    /// Minimal-norm element of `∂G(x)`. Only defined where this crate needs
    /// it: indicators report 0 strictly inside and fail elsewhere.
    fn subgradient_min(&self, x: &SpacePoint) -> Result<SpacePoint>;

    fn has_conjugate(&self) -> bool {
        false
    }

    /// Fenchel conjugate `G*(y)`; `Err(ConjugateUnavailable)` unless
    /// [`has_conjugate`](Self::has_conjugate).
    fn conjugate_evaluate(&self, _y: &SpacePoint) -> Result<f64> {
        Err(Error::ConjugateUnavailable)
    }

    /// Strong-convexity constant of `G*` (equivalently `G` is
    /// `1/λ_{G*}`-smooth). Zero for every nonsmooth potential here.
    fn lambda_gstar(&self) -> f64 {
        0.0
    }

    fn is_indicator(&self) -> bool {
        false
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        invalid(format!(
            "step size must be positive and finite, got {gamma}"
        ))
    }
}

/// Dual iterate `y' = (x - prox_{γG}(x)) / γ`, which by Moreau's identity
/// equals `prox_{G*/γ}(x/γ)`.
pub fn dual_from_primal(
    gamma: f64,
    x: &SpacePoint,
    g: &dyn NonsmoothPotential,
) -> Result<SpacePoint> {
    let p = g.prox(gamma, x)?;
    Ok(dual_from_prox(gamma, x, &p))
}

/// Dual iterate when `prox_{γG}(x)` is already known.
pub fn dual_from_prox(gamma: f64, x: &SpacePoint, p: &SpacePoint) -> SpacePoint {
    let mut y = x.sub(p);
    y.scale(1.0 / gamma);
    y
}

/// Gradient of the Moreau–Yosida envelope `G^λ`: `(x - prox_{λG}(x)) / λ`.
pub fn moreau_gradient(
    lambda: f64,
    x: &SpacePoint,
    g: &dyn NonsmoothPotential,
) -> Result<SpacePoint> {
    check_gamma(lambda)?;
    dual_from_primal(lambda, x, g)
}

/// The Wishart-type prior/posterior potential
/// `-α log det x + tr(x)/2 + ι_{x ≻ 0}` with `α = ((ν + n) - d - 1)/2`.
///
/// For `d = 1` this is a scalar log-barrier on a flat vector of length one;
/// otherwise a spectral log-barrier on symmetric `d×d` matrices.
pub fn build_gamma_potential(nu: f64, n: usize, d: usize) -> Result<LogBarrier> {
    if d == 0 {
        return invalid("dimension must be positive");
    }
    let alpha = ((nu + n as f64) - d as f64 - 1.0) / 2.0;
    if !(alpha >= 0.0) {
        return invalid(format!(
            "log-barrier weight α = ((ν + n) - d - 1)/2 = {alpha} is negative (ν = {nu}, n = {n}, d = {d})"
        ));
    }
    if nu + (n as f64) <= d as f64 + 3.0 {
        log::warn!(
            "n + ν = {} ≤ d + 3 = {}: ∫‖∇G‖² dμ* may be infinite, C-constant estimates are unreliable",
            nu + n as f64,
            d + 3
        );
    }
    let desc = if d == 1 {
        SpaceDescriptor::flat(1)
    } else {
        SpaceDescriptor::symmetric(d)
    };
    LogBarrier::new(desc, alpha, 0.5)
}

#[cfg(test)]
mod tests;
