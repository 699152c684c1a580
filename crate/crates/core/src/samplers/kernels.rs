use crate::error::Result;
use crate::potentials::{
    check_gamma, dual_from_prox, moreau_gradient, LipschitzProxTerm, Minibatch, NonsmoothPotential,
    SmoothPotential,
};
use crate::space::{gaussian_standard, RngStream, SpacePoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub gamma: f64,
    pub minibatch: Minibatch,
}

impl StepOptions {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            minibatch: Minibatch::default(),
        }
    }

    pub fn full(gamma: f64) -> Self {
        Self {
            gamma,
            minibatch: Minibatch::Full,
        }
    }
}

/// Output of a proximal kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximalStep {
    /// `x^{k+1/2}`.
    pub half: SpacePoint,
    /// `x^{k+1}`.
    pub next: SpacePoint,
    /// `y^{k+1} = (x^{k+1/2} - x^{k+1}) / γ`.
    pub dual: SpacePoint,
}

/// `x - γ g + √(2γ) w`.
pub fn langevin_forward(x: &SpacePoint, g: &SpacePoint, w: &SpacePoint, gamma: f64) -> SpacePoint {
    let mut out = x.clone();
    out.axpy(-gamma, g);
    out.axpy((2.0 * gamma).sqrt(), w);
    out
}

/// `x^{k+1} = prox_{γG}(x^{k+1/2})` and the matching dual iterate.
pub fn psgla_backward(
    half: SpacePoint,
    g: &dyn NonsmoothPotential,
    gamma: f64,
) -> Result<ProximalStep> {
    let next = g.prox(gamma, &half)?;
    let dual = dual_from_prox(gamma, &half, &next);
    Ok(ProximalStep { half, next, dual })
}

/// Applies the drawn Lipschitz component (if any) to the forward point,
/// then `prox_{γG}`.
pub fn spla_backward(
    forward: SpacePoint,
    r: Option<&dyn NonsmoothPotential>,
    g: &dyn NonsmoothPotential,
    gamma: f64,
) -> Result<ProximalStep> {
    let half = match r {
        Some(r) => r.prox(gamma, &forward)?,
        None => forward,
    };
    psgla_backward(half, g, gamma)
}

/// Unadjusted Langevin step. Draws gradient indices, then the noise.
pub fn step_ula(
    x: &SpacePoint,
    f: &dyn SmoothPotential,
    opts: &StepOptions,
    rng: &mut RngStream,
) -> Result<SpacePoint> {
    check_gamma(opts.gamma)?;
    let g = f.stochastic_gradient(x, opts.minibatch, rng);
    let w = gaussian_standard(x.descriptor(), rng);
    Ok(langevin_forward(x, &g, &w, opts.gamma))
}

/// Proximal stochastic gradient Langevin step.
pub fn step_psgla(
    x: &SpacePoint,
    f: &dyn SmoothPotential,
    g: &dyn NonsmoothPotential,
    opts: &StepOptions,
    rng: &mut RngStream,
) -> Result<ProximalStep> {
    let half = step_ula(x, f, opts, rng)?;
    psgla_backward(half, g, opts.gamma)
}

/// PSGLA restricted to a set indicator `G = ι_C`.
pub fn step_projected_langevin(
    x: &SpacePoint,
    f: &dyn SmoothPotential,
    c: &dyn NonsmoothPotential,
    opts: &StepOptions,
    rng: &mut RngStream,
) -> Result<SpacePoint> {
    if !c.is_indicator() {
        return crate::error::invalid(format!(
            "projected Langevin needs a set indicator, got {}",
            c.name()
        ));
    }
    Ok(step_psgla(x, f, c, opts, rng)?.next)
}

/// Langevin step on `F + G^λ`. The result is not projected and may leave
/// the domain of `G`.
pub fn step_myula(
    x: &SpacePoint,
    f: &dyn SmoothPotential,
    g: &dyn NonsmoothPotential,
    lambda: f64,
    opts: &StepOptions,
    rng: &mut RngStream,
) -> Result<SpacePoint> {
    check_gamma(opts.gamma)?;
    let moreau = moreau_gradient(lambda, x, g)?;
    let mut grad = f.stochastic_gradient(x, opts.minibatch, rng);
    grad.axpy(1.0, &moreau);
    let w = gaussian_standard(x.descriptor(), rng);
    Ok(langevin_forward(x, &grad, &w, opts.gamma))
}

/// Stochastic proximal Langevin step. Draw order: gradient indices, the
/// Lipschitz component index (only when `R` has several components), noise.
pub fn step_spla(
    x: &SpacePoint,
    f: &dyn SmoothPotential,
    r: &LipschitzProxTerm,
    g: &dyn NonsmoothPotential,
    opts: &StepOptions,
    rng: &mut RngStream,
) -> Result<ProximalStep> {
    check_gamma(opts.gamma)?;
    let grad = f.stochastic_gradient(x, opts.minibatch, rng);
    let component = r.draw(rng);
    let w = gaussian_standard(x.descriptor(), rng);
    let forward = langevin_forward(x, &grad, &w, opts.gamma);
    spla_backward(forward, component, g, opts.gamma)
}
