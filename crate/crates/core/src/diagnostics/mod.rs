//! Checks that tie chains to theory: Wasserstein estimators, ergodic
//! means, the bias constant `C`, and the one-step inequalities behind the
//! convergence analysis.

mod theory;
mod wasserstein;

use serde::Serialize;

pub use theory::{
    estimate_c, estimate_sigma_f, lemma2_residual, pdpg_gap_check, proximal_gradient_fixed_point,
    CEstimate, PdpgReport,
};
pub use wasserstein::{
    sliced_wasserstein2, wasserstein2_1d, wasserstein2_1d_oracle, wasserstein2_1d_oracle_stderr,
    DEFAULT_PROJECTIONS,
};

use crate::error::{invalid, Error, Result};
use crate::potentials::NonsmoothPotential;
use crate::samplers::ChainTrace;
use crate::space::{SpaceDescriptor, SpacePoint};

/// Equally weighted point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<SpacePoint>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<SpacePoint>) -> Result<Self> {
        let Some(first) = points.first() else {
            return invalid("empirical measure needs at least one point");
        };
        let desc = first.descriptor();
        if let Some(p) = points.iter().find(|p| p.descriptor() != desc) {
            return Err(Error::DescriptorMismatch {
                left: desc,
                right: p.descriptor(),
            });
        }
        Ok(Self { points })
    }

    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| SpacePoint::scalar(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        self.points[0].descriptor()
    }

    pub fn points(&self) -> &[SpacePoint] {
        &self.points
    }

    /// Coordinates of a 1-D measure.
    pub fn scalars(&self) -> Result<Vec<f64>> {
        if self.descriptor().ambient_dim() != 1 {
            return invalid(format!(
                "expected a 1-D measure, got ambient dimension {}",
                self.descriptor().ambient_dim()
            ));
        }
        Ok(self.points.iter().map(|p| p.coords()[0]).collect())
    }

    pub fn mean(&self) -> SpacePoint {
        mean_of(&self.points)
    }
}

/// Analytic 1-D target given by its quantile function.
pub trait QuantileOracle: Send + Sync + std::fmt::Debug {
    /// Quantile at `u ∈ (0, 1)`; nondecreasing in `u`.
    fn quantile(&self, u: f64) -> f64;
}

fn mean_of(points: &[SpacePoint]) -> SpacePoint {
    let mut m = SpacePoint::zeros(points[0].descriptor());
    for p in points {
        m.axpy(1.0, p);
    }
    m.scale(1.0 / points.len() as f64);
    m
}

/// Mean of the recorded primal iterates after dropping the first `burn_in`
/// entries.
pub fn ergodic_mean(trace: &ChainTrace, burn_in: usize) -> Result<SpacePoint> {
    ergodic_mean_of(&trace.primal, burn_in)
}

pub fn ergodic_mean_of(points: &[SpacePoint], burn_in: usize) -> Result<SpacePoint> {
    if points.len() <= burn_in {
        return invalid(format!(
            "trace of length {} is empty after dropping {burn_in} entries",
            points.len()
        ));
    }
    Ok(mean_of(&points[burn_in..]))
}

/// Fraction of recorded primal iterates inside the domain of `g`.
pub fn feasibility_fraction(trace: &ChainTrace, g: &dyn NonsmoothPotential) -> Result<f64> {
    feasibility_fraction_of(&trace.primal, g)
}

pub fn feasibility_fraction_of(points: &[SpacePoint], g: &dyn NonsmoothPotential) -> Result<f64> {
    if points.is_empty() {
        return invalid("no recorded iterates");
    }
    let inside = points.iter().filter(|x| g.in_domain(x)).count();
    Ok(inside as f64 / points.len() as f64)
}

/// Summary numbers for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub w2_sq: Option<f64>,
    pub ergodic_mean: Vec<f64>,
    pub feasibility_fraction: f64,
    pub c_estimate: Option<f64>,
    pub lemma2_min_residual: Option<f64>,
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    pub fn is_finite(&self) -> bool {
        self.w2_sq.is_none_or(|w| w.is_finite() && w >= 0.0)
            && self.ergodic_mean.iter().all(|v| v.is_finite())
            && self.feasibility_fraction.is_finite()
            && self.c_estimate.is_none_or(f64::is_finite)
            && self.lemma2_min_residual.is_none_or(f64::is_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PsdIndicator;
    use crate::space::RngStream;

    fn trace(values: &[f64]) -> ChainTrace {
        ChainTrace {
            steps: (1..=values.len()).collect(),
            primal: values.iter().map(|&v| SpacePoint::scalar(v)).collect(),
            feasible_flags: vec![true; values.len()],
            ..ChainTrace::default()
        }
    }

    #[test]
    fn ergodic_mean_examples() {
        assert_eq!(
            ergodic_mean(&trace(&[1.5, 1.5, 1.5]), 0).unwrap().coords(),
            &[1.5]
        );
        assert_eq!(
            ergodic_mean(&trace(&[0.0, 2.0]), 0).unwrap().coords(),
            &[1.0]
        );
        assert_eq!(
            ergodic_mean(&trace(&[5.0, 0.0, 2.0]), 1).unwrap().coords(),
            &[1.0]
        );
        assert!(ergodic_mean(&trace(&[5.0]), 1).is_err());
    }

    #[test]
    fn ergodic_mean_of_iid_samples() {
        let mut rng = RngStream::new(51, 0);
        let n = 20_000;
        let vals: Vec<f64> = (0..n).map(|_| 3.0 + 2.0 * rng.standard_normal()).collect();
        let m = ergodic_mean(&trace(&vals), 0).unwrap().coords()[0];
        assert!((m - 3.0).abs() <= 4.0 * 2.0 / (n as f64).sqrt());
    }

    #[test]
    fn feasibility_detects_injected_point() {
        let g = PsdIndicator::new(2);
        let t = ChainTrace {
            primal: vec![
                SpacePoint::identity(2),
                SpacePoint::from_diagonal(&[1.0, -1.0]),
            ],
            ..ChainTrace::default()
        };
        assert_eq!(feasibility_fraction(&t, &g).unwrap(), 0.5);
        assert!(feasibility_fraction(&ChainTrace::default(), &g).is_err());
    }

    #[test]
    fn measure_invariants() {
        assert!(EmpiricalMeasure::new(vec![]).is_err());
        assert!(
            EmpiricalMeasure::new(vec![SpacePoint::scalar(1.0), SpacePoint::identity(2)]).is_err()
        );
        assert_eq!(
            EmpiricalMeasure::from_scalars(&[1.0, 3.0])
                .unwrap()
                .mean()
                .coords(),
            &[2.0]
        );
    }

    #[test]
    fn report_finiteness() {
        let mut r = DiagnosticsReport {
            w2_sq: Some(0.1),
            ergodic_mean: vec![1.0],
            feasibility_fraction: 1.0,
            c_estimate: None,
            lemma2_min_residual: None,
            notes: vec![],
        };
        assert!(r.is_finite());
        r.w2_sq = Some(-1.0);
        assert!(!r.is_finite());
    }
}
