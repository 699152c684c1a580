use super::{check_gamma, NonsmoothPotential};
use crate::error::{invalid, Error, Result};
use crate::space::{sym_eigendecomposition, SpaceDescriptor, SpacePoint};

/// Relative slack used when deciding membership of closed cones from
/// floating-point spectra.
const CONE_TOL: f64 = 1e-10;

/// `G ≡ 0`.
#[derive(Debug, Clone)]
pub struct ZeroPotential {
    desc: SpaceDescriptor,
}

impl ZeroPotential {
    pub fn new(desc: SpaceDescriptor) -> Self {
        Self { desc }
    }
}

impl NonsmoothPotential for ZeroPotential {
    fn descriptor(&self) -> SpaceDescriptor {
        self.desc
    }

    fn name(&self) -> &'static str {
        "zero"
    }

    fn evaluate(&self, _x: &SpacePoint) -> f64 {
        0.0
    }

    fn prox(&self, gamma: f64, x: &SpacePoint) -> Result<SpacePoint> {
        check_gamma(gamma)?;
        Ok(x.clone())
    }

    fn in_domain(&self, _x: &SpacePoint) -> bool {
        true
    }

    fn subgradient_min(&self, x: &SpacePoint) -> Result<SpacePoint> {
        Ok(SpacePoint::zeros(x.descriptor()))
    }

    fn has_conjugate(&self) -> bool {
        true
    }

    /// Indicator of `{0}`.
    fn conjugate_evaluate(&self, y: &SpacePoint) -> Result<f64> {
        Ok(if y.coords().iter().all(|&v| v == 0.0) {
            0.0
        } else {
            f64::INFINITY
        })
    }
}

/// Componentwise clamp of `x` to `[lo, hi]`. The step size is irrelevant
/// for an indicator but still validated.
pub fn prox_box(gamma: f64, x: &SpacePoint, lo: &[f64], hi: &[f64]) -> Result<SpacePoint> {
    check_gamma(gamma)?;
    check_bounds(lo, hi)?;
    if x.descriptor().is_matrix() || x.coords().len() != lo.len() {
        return invalid("box prox needs a flat vector matching the bounds");
    }
    Ok(clamp(x, lo, hi))
}

fn clamp(x: &SpacePoint, lo: &[f64], hi: &[f64]) -> SpacePoint {
    let mut out = x.clone();
    for ((v, &l), &h) in out.coords_mut().iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
    out
}

fn check_bounds(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.len() != hi.len() {
        return invalid("bounds have different lengths");
    }
    for (i, (l, h)) in lo.iter().zip(hi).enumerate() {
        if !(l <= h) {
            return invalid(format!("empty box in coordinate {i}: [{l}, {h}]"));
        }
    }
    Ok(())
}

/// Indicator of the box `[lo, hi]` in R^d.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxIndicator {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_bounds(&lo, &hi)?;
        if lo.is_empty() {
            return invalid("box must have at least one coordinate");
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }
}

impl NonsmoothPotential for BoxIndicator {
    fn descriptor(&self) -> SpaceDescriptor {
        SpaceDescriptor::flat(self.lo.len())
    }

    fn name(&self) -> &'static str {
        "box"
    }

    fn evaluate(&self, x: &SpacePoint) -> f64 {
        if self.in_domain(x) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, gamma: f64, x: &SpacePoint) -> Result<SpacePoint> {
        check_gamma(gamma)?;
        Ok(clamp(x, &self.lo, &self.hi))
    }

    fn in_domain(&self, x: &SpacePoint) -> bool {
        x.coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| l <= v && v <= h)
    }

    fn subgradient_min(&self, x: &SpacePoint) -> Result<SpacePoint> {
        let interior = x
            .coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| l < v && v < h);
        if interior {
            Ok(SpacePoint::zeros(x.descriptor()))
        } else {
            Err(Error::NotDifferentiable("box boundary or exterior".into()))
        }
    }

    fn has_conjugate(&self) -> bool {
        true
    }

    /// Support function `Σ_i max(lo_i y_i, hi_i y_i)`.
    fn conjugate_evaluate(&self, y: &SpacePoint) -> Result<f64> {
        Ok(y.coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &h))| if v == 0.0 { 0.0 } else { (l * v).max(h * v) })
            .sum())
    }

    fn is_indicator(&self) -> bool {
        true
    }
}

/// Orthogonal projection onto the positive semidefinite cone by
/// eigenvalue clipping.
pub fn prox_psd(gamma: f64, s: &SpacePoint) -> Result<SpacePoint> {
    check_gamma(gamma)?;
    let eig = sym_eigendecomposition(s)?;
    Ok(eig.reconstruct_with(|t| t.max(0.0)))
}

/// Indicator of the PSD cone in symmetric `d×d` matrices.
#[derive(Debug, Clone)]
pub struct PsdIndicator {
    d: usize,
}

impl PsdIndicator {
    pub fn new(d: usize) -> Self {
        Self { d }
    }
}

fn spectrum(x: &SpacePoint) -> Option<Vec<f64>> {
    sym_eigendecomposition(x).ok().map(|e| e.eigenvalues)
}

impl NonsmoothPotential for PsdIndicator {
    fn descriptor(&self) -> SpaceDescriptor {
        SpaceDescriptor::symmetric(self.d)
    }

    fn name(&self) -> &'static str {
        "psd"
    }

    fn evaluate(&self, x: &SpacePoint) -> f64 {
        if self.in_domain(x) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, gamma: f64, x: &SpacePoint) -> Result<SpacePoint> {
        prox_psd(gamma, x)
    }

    fn in_domain(&self, x: &SpacePoint) -> bool {
        match spectrum(x) {
            Some(l) => l[0] >= -CONE_TOL * x.norm().max(1.0),
            None => false,
        }
    }

    fn subgradient_min(&self, x: &SpacePoint) -> Result<SpacePoint> {
        match spectrum(x) {
            Some(l) if l[0] > 0.0 => Ok(SpacePoint::zeros(x.descriptor())),
            _ => Err(Error::NotDifferentiable(
                "PSD cone boundary or exterior".into(),
            )),
        }
    }

    fn has_conjugate(&self) -> bool {
        true
    }

    /// Indicator of the negative semidefinite cone.
    fn conjugate_evaluate(&self, y: &SpacePoint) -> Result<f64> {
        let l = spectrum(y).ok_or(Error::EigenNotConverged {
            sweeps: 0,
            off_norm: f64::NAN,
        })?;
        Ok(if *l.last().unwrap() <= CONE_TOL * y.norm().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        })
    }

    fn is_indicator(&self) -> bool {
        true
    }
}

/// Minimizer over `t > 0` of `-α log t + β t + (t - s)² / (2γ)`:
/// the positive root of `t² - (s - γβ) t - γα = 0`.
///
/// For `α = 0` the result is `max(s - γβ, 0)`, the limit of the closed
/// form, even though 0 is outside `(0, ∞)`.
pub fn prox_logbarrier_scalar(gamma: f64, s: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(alpha >= 0.0) {
        return invalid(format!(
            "log-barrier weight must be nonnegative, got {alpha}"
        ));
    }
    Ok(logbarrier_root(gamma, s, alpha, beta))
}

#[inline]
fn logbarrier_root(gamma: f64, s: f64, alpha: f64, beta: f64) -> f64 {
    let b = s - gamma * beta;
    if alpha == 0.0 {
        return b.max(0.0);
    }
    let c = gamma * alpha;
    let disc = (b * b + 4.0 * c).sqrt();
    if b >= 0.0 {
        (b + disc) / 2.0
    } else {
        // Avoids cancellation in b + disc.
        2.0 * c / (disc - b)
    }
}

/// Prox of `-α log det x + β tr x + ι_{x ≻ 0}`: the scalar log-barrier prox
/// applied to each eigenvalue.
pub fn prox_logdet(gamma: f64, s: &SpacePoint, alpha: f64, beta: f64) -> Result<SpacePoint> {
    check_gamma(gamma)?;
    if !(alpha >= 0.0) {
        return invalid(format!(
            "log-barrier weight must be nonnegative, got {alpha}"
        ));
    }
    let eig = sym_eigendecomposition(s)?;
    Ok(eig.reconstruct_with(|t| logbarrier_root(gamma, t, alpha, beta)))
}

/// `G(x) = -α log det x + β tr x + ι_{x ≻ 0}` on symmetric matrices, or its
/// separable analogue `Σ_i (-α log x_i + β x_i) + ι_{x > 0}` on flat vectors.
#[derive(Debug, Clone)]
pub struct LogBarrier {
    desc: SpaceDescriptor,
    alpha: f64,
    beta: f64,
}

impl LogBarrier {
    pub fn new(desc: SpaceDescriptor, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return invalid(format!(
                "log-barrier weight must be nonnegative, got {alpha}"
            ));
        }
        if !beta.is_finite() {
            return invalid("linear coefficient must be finite");
        }
        Ok(Self { desc, alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl NonsmoothPotential for LogBarrier {
    fn descriptor(&self) -> SpaceDescriptor {
        self.desc
    }

    fn name(&self) -> &'static str {
        if self.desc.is_matrix() {
            "logdet"
        } else {
            "logbarrier"
        }
    }

    fn evaluate(&self, x: &SpacePoint) -> f64 {
        if self.desc.is_matrix() {
            match x.to_dense().cholesky() {
                Ok(ch) => {
                    let log_det = ch.log_det();
                    let lin = self.beta * x.trace();
                    if self.alpha == 0.0 {
                        lin
                    } else {
                        -self.alpha * log_det + lin
                    }
                }
                Err(_) => f64::INFINITY,
            }
        } else if x.coords().iter().all(|&v| v > 0.0) {
            x.coords()
                .iter()
                .map(|&v| {
                    let barrier = if self.alpha == 0.0 {
                        0.0
                    } else {
                        -self.alpha * v.ln()
                    };
                    barrier + self.beta * v
                })
                .sum()
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, gamma: f64, x: &SpacePoint) -> Result<SpacePoint> {
        if self.desc.is_matrix() {
            prox_logdet(gamma, x, self.alpha, self.beta)
        } else {
            check_gamma(gamma)?;
            Ok(x.map(|s| logbarrier_root(gamma, s, self.alpha, self.beta)))
        }
    }

    fn in_domain(&self, x: &SpacePoint) -> bool {
        if self.desc.is_matrix() {
            x.to_dense().cholesky().is_ok()
        } else {
            x.coords().iter().all(|&v| v > 0.0)
        }
    }

    /// `-α x⁻¹ + β I` on the (open) domain.
    fn subgradient_min(&self, x: &SpacePoint) -> Result<SpacePoint> {
        if !self.in_domain(x) {
            return Err(Error::NotDifferentiable(
                "outside the log-barrier domain".into(),
            ));
        }
        if self.desc.is_matrix() {
            let eig = sym_eigendecomposition(x)?;
            if eig.eigenvalues[0] <= 0.0 {
                return Err(Error::NotDifferentiable("singular matrix".into()));
            }
            Ok(eig.reconstruct_with(|l| -self.alpha / l + self.beta))
        } else {
            Ok(x.map(|v| -self.alpha / v + self.beta))
        }
    }
}

/// `G(x) = w Σ_{ij} |x_ij|` over all matrix entries (each off-diagonal pair
/// counted twice), or `w Σ_i |x_i|` on flat vectors.
#[derive(Debug, Clone)]
pub struct L1Norm {
    desc: SpaceDescriptor,
    weight: f64,
}

impl L1Norm {
    pub fn new(desc: SpaceDescriptor, weight: f64) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return invalid(format!(
                "l1 weight must be finite and nonnegative, got {weight}"
            ));
        }
        Ok(Self { desc, weight })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Global Lipschitz constant `w √(number of matrix entries)`.
    pub fn lipschitz(&self) -> f64 {
        let entries = if self.desc.is_matrix() {
            self.desc.d * self.desc.d
        } else {
            self.desc.d
        };
        self.weight * (entries as f64).sqrt()
    }
}

impl NonsmoothPotential for L1Norm {
    fn descriptor(&self) -> SpaceDescriptor {
        self.desc
    }

    fn name(&self) -> &'static str {
        "l1"
    }

    fn evaluate(&self, x: &SpacePoint) -> f64 {
        self.weight
            * x.coords()
                .iter()
                .zip(self.desc.weights())
                .map(|(v, w)| w * v.abs())
                .sum::<f64>()
    }

    /// Soft thresholding at `γw` (the trace weights cancel).
    fn prox(&self, gamma: f64, x: &SpacePoint) -> Result<SpacePoint> {
        check_gamma(gamma)?;
        let t = gamma * self.weight;
        Ok(x.map(|v| v.signum() * (v.abs() - t).max(0.0)))
    }

    fn in_domain(&self, _x: &SpacePoint) -> bool {
        true
    }

    fn subgradient_min(&self, x: &SpacePoint) -> Result<SpacePoint> {
        Ok(x.map(|v| {
            if v == 0.0 {
                0.0
            } else {
                self.weight * v.signum()
            }
        }))
    }

    fn has_conjugate(&self) -> bool {
        true
    }

    /// Indicator of `{y : |y_ij| ≤ w}`.
    fn conjugate_evaluate(&self, y: &SpacePoint) -> Result<f64> {
        let slack = CONE_TOL * self.weight.max(1.0);
        Ok(
            if y.coords().iter().all(|v| v.abs() <= self.weight + slack) {
                0.0
            } else {
                f64::INFINITY
            },
        )
    }
}
