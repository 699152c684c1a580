//! Benchmark targets with known answers: the Wishart prior with a Gaussian
//! likelihood on precision matrices (conjugate posterior), a mean-learning
//! variant with the same prior, and a truncated Gaussian on an interval.

pub mod special;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::QuantileOracle;
use crate::error::{invalid, Result};
use crate::potentials::{
    build_gamma_potential, build_precision_likelihood, build_quadratic_sum, BoxIndicator,
    LipschitzProxTerm, NonsmoothPotential, SmoothPotential,
};
use crate::samplers::Problem;
use crate::space::{DenseSymmetric, RngStream, SpaceDescriptor, SpacePoint};

/// Flat vector of length one for `d = 1`, symmetric matrices otherwise.
pub fn state_descriptor(d: usize) -> SpaceDescriptor {
    if d == 1 {
        SpaceDescriptor::flat(1)
    } else {
        SpaceDescriptor::symmetric(d)
    }
}

/// `n` i.i.d. standard Gaussian `d`-vectors.
pub fn generate_gaussian_data(n: usize, d: usize, rng: &mut RngStream) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return invalid("need at least one data point");
    }
    if d == 0 {
        return invalid("data dimension must be positive");
    }
    Ok((0..n)
        .map(|_| (0..d).map(|_| rng.standard_normal()).collect())
        .collect())
}

/// Wishart(ν, V = I) prior and data `D_1, …, D_n ∈ R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WishartExperimentSpec {
    pub d: usize,
    pub nu: f64,
    pub data: Vec<Vec<f64>>,
    pub data_seed: u64,
}

impl WishartExperimentSpec {
    pub fn new(d: usize, nu: f64, data: Vec<Vec<f64>>, data_seed: u64) -> Result<Self> {
        if d == 0 {
            return invalid("dimension must be positive");
        }
        if !(nu > d as f64 - 1.0) {
            return invalid(format!(
                "degrees of freedom must exceed d - 1 = {}, got {nu}",
                d - 1
            ));
        }
        if let Some(v) = data.iter().find(|v| v.len() != d) {
            return invalid(format!(
                "data vector of length {} in dimension {d}",
                v.len()
            ));
        }
        Ok(Self {
            d,
            nu,
            data,
            data_seed,
        })
    }

    /// Draws `n` standard Gaussian data points from stream 0 of `data_seed`.
    pub fn generate(d: usize, nu: f64, n: usize, data_seed: u64) -> Result<Self> {
        let mut rng = RngStream::new(data_seed, 0);
        let data = generate_gaussian_data(n, d, &mut rng)?;
        Self::new(d, nu, data, data_seed)
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    /// `I + Σ D_i D_iᵀ`.
    pub fn posterior_v_inv(&self) -> DenseSymmetric {
        let d = self.d;
        let mut m = DenseSymmetric::identity(d);
        for v in &self.data {
            for i in 0..d {
                for j in 0..d {
                    m.set(i, j, m.get(i, j) + v[i] * v[j]);
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// `ν' = n + ν`.
    pub posterior_nu: f64,
    /// `V'^{-1} = I + Σ D_i D_iᵀ`.
    pub posterior_v_inv: SpacePoint,
    /// Posterior mean `ν' V'`.
    pub m_star: SpacePoint,
}

fn to_state(m: &DenseSymmetric) -> SpacePoint {
    let d = m.dim();
    let mut p = SpacePoint::zeros(state_descriptor(d));
    for i in 0..d {
        for j in i..d {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            if d == 1 {
                p.coords_mut()[0] = v;
            } else {
                p.set(i, j, v);
            }
        }
    }
    p
}

/// Conjugate posterior `Wishart(n + ν, (I + Σ D_i D_iᵀ)^{-1})` and its mean.
pub fn posterior_ground_truth(spec: &WishartExperimentSpec) -> Result<GroundTruth> {
    let v_inv = spec.posterior_v_inv();
    let chol = v_inv.cholesky()?;
    let posterior_nu = spec.n() as f64 + spec.nu;
    let mut m_star = to_state(&chol.inverse());
    m_star.scale(posterior_nu);
    Ok(GroundTruth {
        posterior_nu,
        posterior_v_inv: to_state(&v_inv),
        m_star,
    })
}

/// Gamma(shape, rate) through its quantile function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaQuantile {
    pub shape: f64,
    pub rate: f64,
}

impl GammaQuantile {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0) {
            return invalid(format!(
                "gamma parameters must be positive, got ({shape}, {rate})"
            ));
        }
        Ok(Self { shape, rate })
    }

    /// The `d = 1` posterior: shape `(ν + n)/2`, rate `(1 + Σ D_i²)/2`.
    pub fn wishart_posterior(spec: &WishartExperimentSpec) -> Result<Self> {
        if spec.d != 1 {
            return invalid(format!(
                "the gamma posterior needs d = 1, got d = {}",
                spec.d
            ));
        }
        let sum_sq: f64 = spec.data.iter().map(|v| v[0] * v[0]).sum();
        Self::new((spec.nu + spec.n() as f64) / 2.0, (1.0 + sum_sq) / 2.0)
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn cdf(&self, x: f64) -> f64 {
        special::gamma_p(self.shape, self.rate * x)
    }
}

impl QuantileOracle for GammaQuantile {
    fn quantile(&self, u: f64) -> f64 {
        special::gamma_quantile(self.shape, self.rate, u)
    }
}

fn check_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        invalid(format!("quantile level must lie in (0, 1), got {u}"))
    }
}

/// Quantile of the `d = 1` Wishart posterior.
pub fn gamma_posterior_quantile(spec: &WishartExperimentSpec, u: f64) -> Result<f64> {
    check_unit(u)?;
    Ok(GammaQuantile::wishart_posterior(spec)?.quantile(u))
}

/// `μ* ∝ exp(-(x - m)²/2)` restricted to `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncGaussSpec {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl TruncGaussSpec {
    pub fn new(mean: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !mean.is_finite() {
            return invalid(format!(
                "need a finite mean and lo < hi, got m = {mean}, [{lo}, {hi}]"
            ));
        }
        Ok(Self { mean, lo, hi })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let a = special::norm_cdf(self.lo - self.mean);
        let b = special::norm_cdf(self.hi - self.mean);
        ((special::norm_cdf(x.clamp(self.lo, self.hi) - self.mean) - a) / (b - a)).clamp(0.0, 1.0)
    }
}

impl Default for TruncGaussSpec {
    fn default() -> Self {
        Self {
            mean: 0.0,
            lo: -1.0,
            hi: 1.0,
        }
    }
}

impl QuantileOracle for TruncGaussSpec {
    /// `m + Φ^{-1}(Φ(a - m) + u (Φ(b - m) - Φ(a - m)))`, with the inverse
    /// taken by bisection on `[a - m, b - m]`.
    fn quantile(&self, u: f64) -> f64 {
        let (za, zb) = (self.lo - self.mean, self.hi - self.mean);
        let (pa, pb) = (special::norm_cdf(za), special::norm_cdf(zb));
        let target = pa + u * (pb - pa);
        self.mean + special::bisect_quantile(special::norm_cdf, target, za, zb, 1e-12)
    }
}

pub fn trunc_gauss_quantile(spec: &TruncGaussSpec, u: f64) -> Result<f64> {
    check_unit(u)?;
    Ok(spec.quantile(u))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    TruncGauss(TruncGaussSpec),
    /// Learn a positive scalar mean: `F = Σ (x - D_i)²/2`, prior-only `G`.
    WishartMean1d(WishartExperimentSpec),
    /// Learn a precision matrix: linear `F`, posterior-weight `G`.
    WishartPrecision(WishartExperimentSpec),
}

/// What is known exactly about the target.
#[derive(Debug, Clone)]
pub enum Truth {
    Quantiles(Arc<dyn QuantileOracle>),
    Wishart {
        truth: GroundTruth,
        /// Present when `d = 1`.
        quantiles: Option<GammaQuantile>,
    },
    /// No closed form (the mean-learning target).
    Unknown,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub problem: Problem,
    pub truth: Truth,
}

impl Experiment {
    pub fn smooth(&self) -> &dyn SmoothPotential {
        self.problem.smooth.as_ref()
    }

    pub fn nonsmooth(&self) -> &dyn NonsmoothPotential {
        self.problem.nonsmooth.as_ref()
    }

    pub fn quantile_oracle(&self) -> Option<&dyn QuantileOracle> {
        match &self.truth {
            Truth::Quantiles(q) => Some(q.as_ref()),
            Truth::Wishart {
                quantiles: Some(q), ..
            } => Some(q),
            _ => None,
        }
    }

    pub fn ground_truth(&self) -> Option<&GroundTruth> {
        match &self.truth {
            Truth::Wishart { truth, .. } => Some(truth),
            _ => None,
        }
    }
}

/// Wires the potentials and the exact answer for one experiment.
pub fn assemble_experiment(spec: &ExperimentSpec) -> Result<Experiment> {
    match spec {
        ExperimentSpec::TruncGauss(s) => {
            let s = TruncGaussSpec::new(s.mean, s.lo, s.hi)?;
            let f = build_quadratic_sum(vec![SpacePoint::scalar(s.mean)])?;
            let g = BoxIndicator::interval(s.lo, s.hi)?;
            Ok(Experiment {
                problem: Problem::new(Arc::new(f), Arc::new(g))?,
                truth: Truth::Quantiles(Arc::new(s)),
            })
        }
        ExperimentSpec::WishartMean1d(s) => {
            if s.d != 1 {
                return invalid(format!(
                    "the mean-learning experiment is one-dimensional, got d = {}",
                    s.d
                ));
            }
            let g = build_gamma_potential(s.nu, 0, 1)?;
            let data = s.data.iter().map(|v| SpacePoint::scalar(v[0])).collect();
            let f = build_quadratic_sum(data)?;
            Ok(Experiment {
                problem: Problem::new(Arc::new(f), Arc::new(g))?,
                truth: Truth::Unknown,
            })
        }
        ExperimentSpec::WishartPrecision(s) => {
            let g = build_gamma_potential(s.nu, s.n(), s.d)?;
            let f = build_precision_likelihood(&s.data)?;
            let truth = posterior_ground_truth(s)?;
            let quantiles = if s.d == 1 {
                Some(GammaQuantile::wishart_posterior(s)?)
            } else {
                None
            };
            Ok(Experiment {
                problem: Problem::new(Arc::new(f), Arc::new(g))?,
                truth: Truth::Wishart { truth, quantiles },
            })
        }
    }
}

/// Adds `r(x, ξ) = w_ξ ‖x‖₁` to an experiment's target. The exact answer
/// no longer applies and is dropped.
pub fn with_l1_term(mut exp: Experiment, weights: &[f64]) -> Result<Experiment> {
    if weights.is_empty() {
        return Ok(exp);
    }
    let r = LipschitzProxTerm::l1(exp.problem.descriptor(), weights)?;
    exp.problem = exp.problem.with_lipschitz(r)?;
    exp.truth = Truth::Unknown;
    Ok(exp)
}

#[cfg(test)]
mod tests;
