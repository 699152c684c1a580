//! Langevin-type samplers for `μ* ∝ exp(-F - G)` (and `exp(-F - R - G)`),
//! as one-step kernels plus single-chain and ensemble drivers.
//!
//! The proximal kernels expose the forward point `x^{k+1/2}` and the dual
//! iterate `y^{k+1} = (x^{k+1/2} - x^{k+1}) / γ` alongside the new state.

mod chain;
mod kernels;
mod tune;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use chain::{
    run_chain, run_chain_on_stream, run_ensemble, run_ensemble_with, ChainTrace, EnsembleResult,
};
pub use kernels::{
    langevin_forward, psgla_backward, spla_backward, step_myula, step_projected_langevin,
    step_psgla, step_spla, step_ula, ProximalStep, StepOptions,
};
pub use tune::tune_for_epsilon;

use crate::error::{invalid, Error, Result};
use crate::potentials::{LipschitzProxTerm, Minibatch, NonsmoothPotential, SmoothPotential};
use crate::space::{SpaceDescriptor, SpacePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Ula,
    Psgla,
    Myula,
    Projected,
    Spla,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 5] = [
        SamplerKind::Ula,
        SamplerKind::Psgla,
        SamplerKind::Myula,
        SamplerKind::Projected,
        SamplerKind::Spla,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Ula => "ula",
            SamplerKind::Psgla => "psgla",
            SamplerKind::Myula => "myula",
            SamplerKind::Projected => "projected",
            SamplerKind::Spla => "spla",
        }
    }

    /// Kernels that apply `prox_{γG}` and therefore produce a forward point
    /// and a dual iterate.
    pub fn is_proximal(self) -> bool {
        matches!(
            self,
            SamplerKind::Psgla | SamplerKind::Projected | SamplerKind::Spla
        )
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sampler {s:?}")))
    }
}

/// Target `exp(-F - R - G)` with `R` possibly absent.
#[derive(Debug, Clone)]
pub struct Problem {
    pub smooth: Arc<dyn SmoothPotential>,
    pub nonsmooth: Arc<dyn NonsmoothPotential>,
    pub lipschitz: LipschitzProxTerm,
}

impl Problem {
    pub fn new(
        smooth: Arc<dyn SmoothPotential>,
        nonsmooth: Arc<dyn NonsmoothPotential>,
    ) -> Result<Self> {
        if smooth.descriptor() != nonsmooth.descriptor() {
            return Err(Error::DescriptorMismatch {
                left: smooth.descriptor(),
                right: nonsmooth.descriptor(),
            });
        }
        Ok(Self {
            smooth,
            nonsmooth,
            lipschitz: LipschitzProxTerm::zero(),
        })
    }

    pub fn with_lipschitz(mut self, r: LipschitzProxTerm) -> Result<Self> {
        if !r.is_zero() && r.component(0).descriptor() != self.descriptor() {
            return Err(Error::DescriptorMismatch {
                left: self.descriptor(),
                right: r.component(0).descriptor(),
            });
        }
        self.lipschitz = r;
        Ok(self)
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        self.smooth.descriptor()
    }

    /// Identity for matrix spaces, `prox_{γG}(1, …, 1)` for flat vectors.
    pub fn default_initial(&self, gamma: f64) -> Result<SpacePoint> {
        let desc = self.descriptor();
        if desc.is_matrix() {
            Ok(SpacePoint::identity(desc.d))
        } else {
            self.nonsmooth
                .prox(gamma, &SpacePoint::from_vec(vec![1.0; desc.d]))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub gamma: f64,
    pub num_steps: usize,
    pub burn_in: usize,
    pub minibatch: Minibatch,
    pub myula_lambda: Option<f64>,
    pub seed: u64,
    pub record_every: usize,
    /// Also record forward points and dual iterates (proximal kernels only).
    pub record_duals: bool,
    /// Overrides [`Problem::default_initial`].
    pub initial: Option<SpacePoint>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.01,
            num_steps: 1000,
            burn_in: 0,
            minibatch: Minibatch::default(),
            myula_lambda: None,
            seed: 0,
            record_every: 1,
            record_duals: false,
            initial: None,
        }
    }
}

impl SamplerConfig {
    /// Checks the configuration against a sampler and a target. Returns
    /// `true` when `γ > 1/L`, outside the regime covered by the
    /// convergence bounds (a warning, not an error).
    pub fn validate(&self, kind: SamplerKind, problem: &Problem) -> Result<bool> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return invalid(format!(
                "gamma must be positive and finite, got {}",
                self.gamma
            ));
        }
        if self.num_steps == 0 {
            return invalid("num_steps must be at least 1");
        }
        if self.burn_in >= self.num_steps {
            return invalid(format!(
                "burn_in ({}) must be smaller than num_steps ({})",
                self.burn_in, self.num_steps
            ));
        }
        if self.record_every == 0 {
            return invalid("record_every must be at least 1");
        }
        if self.minibatch == Minibatch::Size(0) {
            return invalid("minibatch size must be at least 1");
        }
        match (kind, self.myula_lambda) {
            (SamplerKind::Myula, None) => return invalid("myula requires myula_lambda"),
            (SamplerKind::Myula, Some(l)) if !(l > 0.0 && l.is_finite()) => {
                return invalid(format!("myula_lambda must be positive, got {l}"))
            }
            _ => {}
        }
        if self.record_duals && !kind.is_proximal() {
            return invalid(format!(
                "{kind} has no dual iterate; record_duals must be false"
            ));
        }
        if kind == SamplerKind::Projected && !problem.nonsmooth.is_indicator() {
            return invalid(format!(
                "projected Langevin needs a set indicator, got {}",
                problem.nonsmooth.name()
            ));
        }
        if let Some(x0) = &self.initial {
            if x0.descriptor() != problem.descriptor() {
                return Err(Error::DescriptorMismatch {
                    left: x0.descriptor(),
                    right: problem.descriptor(),
                });
            }
        }
        let l = problem.smooth.smoothness();
        let too_large = l > 0.0 && self.gamma > 1.0 / l;
        if too_large {
            log::warn!("gamma = {} exceeds 1/L = {}", self.gamma, 1.0 / l);
        }
        Ok(too_large)
    }

    pub(crate) fn step_options(&self) -> StepOptions {
        StepOptions {
            gamma: self.gamma,
            minibatch: self.minibatch,
        }
    }

    pub(crate) fn initial_point(&self, problem: &Problem) -> Result<SpacePoint> {
        match &self.initial {
            Some(x) => Ok(x.clone()),
            None => problem.default_initial(self.gamma),
        }
    }

    pub(crate) fn is_recorded(&self, step: usize) -> bool {
        step > self.burn_in && (step - self.burn_in).is_multiple_of(self.record_every)
    }
}
