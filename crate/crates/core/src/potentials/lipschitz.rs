use std::sync::Arc;

use super::{L1Norm, NonsmoothPotential};
use crate::error::{invalid, Result};
use crate::space::{RngStream, SpaceDescriptor, SpacePoint};

/// `R(x) = E_ξ r(x, ξ)` with full-domain, Lipschitz components `r(·, ξ)`,
/// `ξ` uniform over the components, and `E_ξ ‖∂⁰r(x, ξ)‖² ≤ M²`.
///
/// An empty term is `R ≡ 0`; drawing from it consumes no randomness.
#[derive(Debug, Clone, Default)]
pub struct LipschitzProxTerm {
    components: Vec<Arc<dyn NonsmoothPotential>>,
    second_moment_bound: f64,
}

impl LipschitzProxTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `m` must bound the root mean square of the minimal subgradient norms.
    pub fn new(components: Vec<Arc<dyn NonsmoothPotential>>, m: f64) -> Result<Self> {
        if let Some(first) = components.first() {
            let desc = first.descriptor();
            if components.iter().any(|c| c.descriptor() != desc) {
                return invalid("components live on different spaces");
            }
        }
        if !(m >= 0.0) {
            return invalid("second-moment bound must be nonnegative");
        }
        Ok(Self {
            components,
            second_moment_bound: m,
        })
    }

    /// `r(x, ξ) = w_ξ ‖x‖₁` with `ξ` uniform over `weights`.
    pub fn l1(desc: SpaceDescriptor, weights: &[f64]) -> Result<Self> {
        let mut components: Vec<Arc<dyn NonsmoothPotential>> = Vec::with_capacity(weights.len());
        let mut m2 = 0.0;
        for &w in weights {
            let term = L1Norm::new(desc, w)?;
            m2 += term.lipschitz().powi(2);
            components.push(Arc::new(term));
        }
        let m = if weights.is_empty() {
            0.0
        } else {
            (m2 / weights.len() as f64).sqrt()
        };
        Self::new(components, m)
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &dyn NonsmoothPotential {
        self.components[i].as_ref()
    }

    /// `M` in `E_ξ ‖∂⁰r(x, ξ)‖² ≤ M²`.
    pub fn m_bound(&self) -> f64 {
        self.second_moment_bound
    }

    /// Draws `r(·, ξ)`; a single component is returned without drawing.
    pub fn draw(&self, rng: &mut RngStream) -> Option<&dyn NonsmoothPotential> {
        match self.components.len() {
            0 => None,
            1 => Some(self.components[0].as_ref()),
            n => Some(self.components[rng.index(n)].as_ref()),
        }
    }

    pub fn evaluate(&self, x: &SpacePoint) -> f64 {
        if self.components.is_empty() {
            return 0.0;
        }
        self.components.iter().map(|c| c.evaluate(x)).sum::<f64>() / self.components.len() as f64
    }

    /// Exact `E_ξ ‖∂⁰r(x, ξ)‖²` at `x`.
    pub fn subgradient_second_moment(&self, x: &SpacePoint) -> Result<f64> {
        if self.components.is_empty() {
            return Ok(0.0);
        }
        let mut s = 0.0;
        for c in &self.components {
            s += c.subgradient_min(x)?.norm_sq();
        }
        Ok(s / self.components.len() as f64)
    }
}
